use super::builder::{Layout, ProgramBuilder};
use super::{lmul_for, random_values, rng_for, store_values, Dtype, Expected, GeneratedKernel, KernelSpec};
use crate::error::{Error, Result};
use crate::isa::Geometry;

// Static code sites, one per instruction of the assembly listing.
const S_VSETVLI: u32 = 0;
const S_ZERO: u32 = 1;
const S_LOAD_B: u32 = 2;
const S_PTR: u32 = 3;
const S_LOOP: u32 = 4;
const S_ROW: u32 = 8;
const S_STORE: u32 = 64;

/// Widest register group used; longer rows are strip-mined so that
/// `DEFAULT_BLOCK_ROWS` accumulators still fit in the register file.
const MAX_LMUL: u8 = 2;
const DEFAULT_BLOCK_ROWS: usize = 8;

/// C[rows x n] = A[rows x n] * B[n x n], vectorized along the rows of B.
///
/// Each output row block keeps its accumulators in the register file and
/// streams B one row at a time into a double buffer. Per B row, every
/// resident output row takes a scalar load of its A element, a pointer bump,
/// and one scalar-vector multiply-accumulate. Rows longer than one register
/// group are processed in column strips.
pub(super) fn generate(spec: &KernelSpec, geom: &Geometry) -> Result<GeneratedKernel> {
    let n = spec.n;
    let rows = spec.rows.unwrap_or(n);
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::Config(format!("matmul size {n} is not a positive multiple of 4")));
    }
    if rows == 0 || rows > n {
        return Err(Error::Config(format!("matmul row count {rows} outside 1..={n}")));
    }
    let dt = spec.dtype;
    let ew = dt.ew();
    let eb = dt.bytes();
    let lmul = lmul_for(geom, ew, n, MAX_LMUL);
    let vlmax = geom.vlmax(ew, lmul);
    let block = spec
        .block_rows
        .unwrap_or(DEFAULT_BLOCK_ROWS)
        .min(rows);
    let l = lmul as usize;
    let regs = block * l + if dt.is_fp() { 2 * l } else { 3 * l };
    if block == 0 || regs > 32 {
        return Err(Error::Config(format!(
            "{block} resident rows at LMUL {lmul} need {regs} vector registers"
        )));
    }

    let mut rng = rng_for(spec);
    let a = random_values(&mut rng, dt, rows * n);
    let b = random_values(&mut rng, dt, n * n);
    let mut layout = Layout::default();
    let a_addr = layout.alloc(rows * n * eb);
    let b_addr = layout.alloc(n * n * eb);
    let c_addr = layout.alloc(rows * n * eb);
    let mut mem = layout.memory();
    store_values(&mut mem, a_addr, dt, &a)?;
    store_values(&mut mem, b_addr, dt, &b)?;

    let acc = |r: usize| (r * l) as u8;
    let buf = |k: usize| (block * l + (k % 2) * l) as u8;
    let tmp = (block * l + 2 * l) as u8;
    let sew = dt.sew_token();
    let width = ew.bits();

    let mut p = ProgramBuilder::new();
    for i0 in (0..rows).step_by(block) {
        let rb = block.min(rows - i0);
        for j0 in (0..n).step_by(vlmax) {
            let vl = vlmax.min(n - j0);
            p.vector(S_VSETVLI, &format!("vsetvli t0, a0, {sew}, m{lmul}"), &[vl as u64])?;
            for r in 0..rb {
                p.vector(S_ZERO, &format!("vmv.v.i v{}, 0", acc(r)), &[])?;
            }
            let b_row = |k: usize| b_addr + ((k * n + j0) * eb) as u64;
            p.vector(S_LOAD_B, &format!("vle{width}.v v{}, (a1)", buf(0)), &[b_row(0)])?;
            for k in 0..n {
                if k + 1 < n {
                    p.vector(S_LOAD_B, &format!("vle{width}.v v{}, (a1)", buf(k + 1)), &[b_row(k + 1)])?;
                }
                p.alu(S_PTR);
                p.branch(S_LOOP);
                for r in 0..rb {
                    let site = S_ROW + 4 * r as u32;
                    let a_elem = a_addr + (((i0 + r) * n + k) * eb) as u64;
                    let coef = dt.encode(a[(i0 + r) * n + k]);
                    p.load(site, a_elem);
                    p.alu(site + 1);
                    if dt.is_fp() {
                        p.vector(site + 2, &format!("vfmacc.vf v{}, ft0, v{}", acc(r), buf(k)), &[coef])?;
                    } else {
                        p.vector(site + 2, &format!("vmul.vx v{tmp}, v{}, t1", buf(k)), &[coef])?;
                        p.vector(site + 3, &format!("vadd.vv v{0}, v{0}, v{tmp}", acc(r)), &[])?;
                    }
                }
            }
            for r in 0..rb {
                let c_row = c_addr + (((i0 + r) * n + j0) * eb) as u64;
                p.alu(S_STORE + 2 * r as u32);
                p.vector(S_STORE + 2 * r as u32 + 1, &format!("vse{width}.v v{}, (a2)", acc(r)), &[c_row])?;
            }
        }
    }

    let mut c = vec![0.0; rows * n];
    for i in 0..rows {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    if dt == Dtype::Int32 {
        c.iter_mut().for_each(|v| *v = *v as i64 as i32 as f64);
    }
    Ok(GeneratedKernel {
        spec: *spec,
        program: p.program,
        memory: mem,
        expected: Expected::Memory { addr: c_addr, values: c },
    })
}
