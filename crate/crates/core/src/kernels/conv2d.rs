use super::builder::{Layout, ProgramBuilder};
use super::{lmul_for, random_values, rng_for, store_values, Dtype, Expected, GeneratedKernel, KernelSpec};
use crate::error::{Error, Result};
use crate::isa::Geometry;

pub(super) const K: usize = 7;
pub(super) const CHANNELS: usize = 3;

/// Valid 3x7x7 convolution of a 3-channel h x w image.
///
/// Seven output rows stay resident while every input row that touches them
/// is loaded once; the seven column taps come from slides of that row. All
/// vector work runs at vl = w, so output rows are stored w wide and the
/// trailing K - 1 columns are scratch.
pub(super) fn generate(spec: &KernelSpec, geom: &Geometry) -> Result<GeneratedKernel> {
    let h = spec.n;
    let w = spec.width.unwrap_or(h);
    if h < K || w < K {
        return Err(Error::Config(format!("conv2d image {h}x{w} is smaller than the {K}x{K} kernel")));
    }
    let dt = spec.dtype;
    let ew = dt.ew();
    let eb = dt.bytes();
    let lmul = lmul_for(geom, ew, w, 2);
    if geom.vlmax(ew, lmul) < w {
        return Err(Error::Config(format!(
            "conv2d rows of {w} elements exceed a two-register group"
        )));
    }
    let l = lmul as usize;
    let (oh, ow) = (h - K + 1, w - K + 1);

    let mut rng = rng_for(spec);
    let img = random_values(&mut rng, dt, CHANNELS * h * w);
    let ker = random_values(&mut rng, dt, CHANNELS * K * K);
    let mut layout = Layout::default();
    let img_addr = layout.alloc(img.len() * eb);
    let ker_addr = layout.alloc(ker.len() * eb);
    let out_addr = layout.alloc(oh * w * eb);
    let mut mem = layout.memory();
    store_values(&mut mem, img_addr, dt, &img)?;
    store_values(&mut mem, ker_addr, dt, &ker)?;

    let out_reg = |r: usize| (r * l) as u8;
    let input = (K * l) as u8;
    let slide = |j: usize| ((K + 1 + j % 2) * l) as u8;
    let tmp = ((K + 3) * l) as u8;
    let sew = dt.sew_token();
    let width = ew.bits();

    let mut p = ProgramBuilder::new();
    p.vector(0, &format!("vsetvli t0, a0, {sew}, m{lmul}"), &[w as u64])?;
    for ob in (0..oh).step_by(K) {
        let rows = K.min(oh - ob);
        for r in 0..rows {
            p.vector(1, &format!("vmv.v.i v{}, 0", out_reg(r)), &[])?;
        }
        for c in 0..CHANNELS {
            for ir in ob..ob + rows + K - 1 {
                let row_addr = img_addr + ((c * h + ir) * w * eb) as u64;
                p.alu(2);
                p.vector(3, &format!("vle{width}.v v{input}, (a1)"), &[row_addr])?;
                for j in 0..K {
                    let src = if j == 0 {
                        input
                    } else {
                        p.vector(4, &format!("vslidedown.vi v{}, v{input}, {j}", slide(j)), &[])?;
                        slide(j)
                    };
                    for r in 0..rows {
                        let Some(kr) = ir.checked_sub(ob + r).filter(|&kr| kr < K) else {
                            continue;
                        };
                        let ki = (c * K + kr) * K + j;
                        let site = 8 + 4 * r as u32;
                        p.load(site, ker_addr + (ki * eb) as u64);
                        let coef = dt.encode(ker[ki]);
                        if dt.is_fp() {
                            p.vector(site + 1, &format!("vfmacc.vf v{}, ft0, v{src}", out_reg(r)), &[coef])?;
                        } else {
                            p.vector(site + 1, &format!("vmul.vx v{tmp}, v{src}, t1"), &[coef])?;
                            p.vector(site + 2, &format!("vadd.vv v{0}, v{0}, v{tmp}", out_reg(r)), &[])?;
                        }
                    }
                }
                p.alu(5);
                p.branch(6);
            }
        }
        for r in 0..rows {
            p.alu(40);
            let addr = out_addr + ((ob + r) * w * eb) as u64;
            p.vector(41, &format!("vse{width}.v v{}, (a2)", out_reg(r)), &[addr])?;
        }
    }

    // reference over the useful columns; the scratch tail is not checked
    let mut values = Vec::with_capacity(oh * w);
    let mut mem_expected = Vec::new();
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for c in 0..CHANNELS {
                for ky in 0..K {
                    for kx in 0..K {
                        acc += img[(c * h + y + ky) * w + x + kx] * ker[(c * K + ky) * K + kx];
                    }
                }
            }
            if dt == Dtype::Int32 {
                acc = acc as i64 as i32 as f64;
            }
            values.push(acc);
        }
        mem_expected.push(out_addr + (y * w * eb) as u64);
    }
    Ok(GeneratedKernel {
        spec: *spec,
        program: p.program,
        memory: mem,
        expected: Expected::Rows {
            addrs: mem_expected,
            width: ow,
            values,
        },
    })
}
