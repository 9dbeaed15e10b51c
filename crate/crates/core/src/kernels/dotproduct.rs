use super::builder::{Layout, ProgramBuilder};
use super::{random_values, rng_for, store_values, Dtype, Expected, GeneratedKernel, KernelSpec};
use crate::error::{Error, Result};
use crate::isa::Geometry;

pub(super) const ACC: u8 = 24;
pub(super) const RESULT: u8 = 25;

/// Strip-mined dot product: per strip a vsetvli, two unit-stride loads,
/// pointer arithmetic and one multiply-accumulate into a full-width
/// accumulator, followed by a single reduction.
///
/// The floating-point listing is 7 + 9N instructions for N strips; integer
/// types spend one more per strip on a separate multiply.
pub(super) fn generate(spec: &KernelSpec, geom: &Geometry) -> Result<GeneratedKernel> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::Config("dotproduct needs at least one element".into()));
    }
    let dt = spec.dtype;
    let eb = dt.bytes();
    let vlmax = geom.vlmax(dt.ew(), 1);
    let sew = dt.sew_token();
    let width = dt.ew().bits();

    let mut rng = rng_for(spec);
    let x = random_values(&mut rng, dt, n);
    let y = random_values(&mut rng, dt, n);
    let mut layout = Layout::default();
    let x_addr = layout.alloc(n * eb);
    let y_addr = layout.alloc(n * eb);
    let mut mem = layout.memory();
    store_values(&mut mem, x_addr, dt, &x)?;
    store_values(&mut mem, y_addr, dt, &y)?;

    let vsetvli = format!("vsetvli t0, a0, {sew}, m1");
    let mut p = ProgramBuilder::new();
    p.vector(0, &vsetvli, &[n as u64])?;
    p.vector(1, &format!("vmv.v.i v{ACC}, 0"), &[])?;
    let mut done = 0;
    while done < n {
        let vl = vlmax.min(n - done);
        let off = (done * eb) as u64;
        p.vector(2, &vsetvli, &[(n - done) as u64])?;
        p.vector(3, &format!("vle{width}.v v8, (a1)"), &[x_addr + off])?;
        p.alu(4);
        p.alu(5);
        p.vector(6, &format!("vle{width}.v v16, (a2)"), &[y_addr + off])?;
        p.alu(7);
        if dt.is_fp() {
            p.vector(8, &format!("vfmacc.vv v{ACC}, v8, v16"), &[])?;
        } else {
            p.vector(8, "vmul.vv v8, v8, v16", &[])?;
            p.vector(9, &format!("vadd.vv v{ACC}, v{ACC}, v8"), &[])?;
        }
        p.alu(10);
        p.branch(11);
        done += vl;
    }
    // the accumulator holds partial sums in its first min(n, vlmax) elements
    p.vector(12, &vsetvli, &[n.min(vlmax) as u64])?;
    p.vector(13, &format!("vmv.s.x v{RESULT}, zero"), &[0])?;
    if dt.is_fp() {
        p.vector(14, &format!("vfredusum.vs v{RESULT}, v{ACC}, v{RESULT}"), &[])?;
        p.vector(15, &format!("vfmv.f.s ft0, v{RESULT}"), &[])?;
    } else {
        p.vector(14, &format!("vredsum.vs v{RESULT}, v{ACC}, v{RESULT}"), &[])?;
        p.vector(15, &format!("vmv.x.s t1, v{RESULT}"), &[])?;
    }
    p.branch(16);

    let mut value: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    if dt == Dtype::Int32 {
        value = value as i64 as i32 as f64;
    }
    Ok(GeneratedKernel {
        spec: *spec,
        program: p.program,
        memory: mem,
        expected: Expected::Scalar { reg: RESULT, value },
    })
}
