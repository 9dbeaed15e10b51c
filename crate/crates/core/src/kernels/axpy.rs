use super::builder::{Layout, ProgramBuilder};
use super::{random_values, rng_for, store_values, Dtype, Expected, GeneratedKernel, KernelSpec};
use crate::error::Result;
use crate::isa::Geometry;

/// y <- a * x + y, strip-mined at LMUL 8.
pub(super) fn generate(spec: &KernelSpec, geom: &Geometry) -> Result<GeneratedKernel> {
    let n = spec.n;
    let dt = spec.dtype;
    let eb = dt.bytes();
    let vlmax = geom.vlmax(dt.ew(), 8);
    let sew = dt.sew_token();
    let width = dt.ew().bits();

    let mut rng = rng_for(spec);
    let a = random_values(&mut rng, dt, 1)[0];
    let x = random_values(&mut rng, dt, n);
    let y = random_values(&mut rng, dt, n);
    let mut layout = Layout::default();
    let x_addr = layout.alloc(n * eb);
    let y_addr = layout.alloc(n * eb);
    let mut mem = layout.memory();
    store_values(&mut mem, x_addr, dt, &x)?;
    store_values(&mut mem, y_addr, dt, &y)?;

    let mut p = ProgramBuilder::new();
    let mut done = 0;
    while done < n {
        let vl = vlmax.min(n - done);
        let off = (done * eb) as u64;
        p.vector(0, &format!("vsetvli t0, a0, {sew}, m8"), &[(n - done) as u64])?;
        p.vector(1, &format!("vle{width}.v v0, (a1)"), &[x_addr + off])?;
        p.vector(2, &format!("vle{width}.v v8, (a2)"), &[y_addr + off])?;
        if dt.is_fp() {
            p.vector(3, "vfmacc.vf v8, ft0, v0", &[dt.encode(a)])?;
        } else {
            p.vector(3, "vmul.vx v16, v0, t1", &[dt.encode(a)])?;
            p.vector(4, "vadd.vv v8, v8, v16", &[])?;
        }
        p.vector(5, &format!("vse{width}.v v8, (a2)"), &[y_addr + off])?;
        for site in 6..10 {
            p.alu(site);
        }
        p.branch(10);
        done += vl;
    }

    let values = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| {
            let v = a * xi + yi;
            if dt == Dtype::Int32 {
                v as i64 as i32 as f64
            } else {
                v
            }
        })
        .collect();
    Ok(GeneratedKernel {
        spec: *spec,
        program: p.program,
        memory: mem,
        expected: Expected::Memory { addr: y_addr, values },
    })
}
