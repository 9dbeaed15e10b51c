use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Element width of a vector operand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ew {
    E8,
    E16,
    E32,
    E64,
}

impl Ew {
    pub const ALL: [Ew; 4] = [Ew::E8, Ew::E16, Ew::E32, Ew::E64];

    pub fn bits(self) -> u32 {
        match self {
            Ew::E8 => 8,
            Ew::E16 => 16,
            Ew::E32 => 32,
            Ew::E64 => 64,
        }
    }

    pub fn bytes(self) -> usize {
        self.bits() as usize / 8
    }

    pub fn from_bits(bits: u32) -> Option<Ew> {
        match bits {
            8 => Some(Ew::E8),
            16 => Some(Ew::E16),
            32 => Some(Ew::E32),
            64 => Some(Ew::E64),
            _ => None,
        }
    }

    /// Mask selecting the low `bits()` bits of a u64.
    pub fn mask(self) -> u64 {
        match self {
            Ew::E64 => u64::MAX,
            e => (1u64 << e.bits()) - 1,
        }
    }

    /// Sign-extends the low `bits()` bits of `v` to 64 bits.
    pub fn sext(self, v: u64) -> i64 {
        let shift = 64 - self.bits();
        ((v << shift) as i64) >> shift
    }
}

impl fmt::Display for Ew {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.bits())
    }
}

/// Physical vector length parameters of the machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Geometry {
    pub lanes: usize,
    /// Bits of each vector register held by one lane.
    pub vlen_per_lane: usize,
}

impl Geometry {
    pub fn new(lanes: usize, vlen_per_lane: usize) -> Result<Self> {
        if lanes == 0 || !lanes.is_power_of_two() {
            return Err(Error::Config(format!("lane count {lanes} is not a power of two")));
        }
        if vlen_per_lane < 64 || !vlen_per_lane.is_multiple_of(64) {
            return Err(Error::Config(format!(
                "vlen_per_lane {vlen_per_lane} must be a positive multiple of 64"
            )));
        }
        Ok(Geometry {
            lanes,
            vlen_per_lane,
        })
    }

    /// VLEN in bits.
    pub fn vlen(&self) -> usize {
        self.vlen_per_lane * self.lanes
    }

    /// VLEN in bytes.
    pub fn vlenb(&self) -> usize {
        self.vlen() / 8
    }

    /// 64-bit words of one register held by one lane.
    pub fn words_per_reg(&self) -> usize {
        self.vlen_per_lane / 64
    }

    pub fn vlmax(&self, sew: Ew, lmul: u8) -> usize {
        self.vlen() * lmul as usize / sew.bits() as usize
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry {
            lanes: 4,
            vlen_per_lane: 1024,
        }
    }
}

/// Vector type state produced by `vsetvl`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VType {
    pub sew: Ew,
    pub lmul: u8,
    pub vl: usize,
    pub vlmax: usize,
}

impl VType {
    /// State after reset: e64, m1, vl = 0.
    pub fn reset(geom: &Geometry) -> Self {
        VType {
            sew: Ew::E64,
            lmul: 1,
            vl: 0,
            vlmax: geom.vlmax(Ew::E64, 1),
        }
    }

    /// Encodes sew/lmul in the `vtype` CSR layout (vsew in bits 5:3, vlmul in 2:0).
    pub fn encode(&self) -> u64 {
        let vsew = self.sew.bits().trailing_zeros() as u64 - 3;
        let vlmul = (self.lmul as u64).trailing_zeros() as u64;
        (vsew << 3) | vlmul
    }
}

pub fn check_lmul(lmul: u8) -> Result<()> {
    match lmul {
        1 | 2 | 4 | 8 => Ok(()),
        _ => Err(Error::Config(format!("unsupported LMUL {lmul}"))),
    }
}

/// Computes the vector type for a requested element count.
pub fn vsetvl(avl: usize, sew_bits: u32, lmul: u8, geom: &Geometry) -> Result<VType> {
    let sew = Ew::from_bits(sew_bits)
        .ok_or_else(|| Error::Config(format!("unsupported SEW {sew_bits}")))?;
    check_lmul(lmul)?;
    let vlmax = geom.vlmax(sew, lmul);
    Ok(VType {
        sew,
        lmul,
        vl: avl.min(vlmax),
        vlmax,
    })
}

/// Decodes a `vtype` CSR value into (sew bits, lmul).
pub fn decode_vtype(raw: u64) -> Result<(u32, u8)> {
    let vsew = (raw >> 3) & 0x7;
    let vlmul = raw & 0x7;
    if vsew > 3 || vlmul > 3 {
        return Err(Error::Config(format!("unsupported vtype encoding {raw:#x}")));
    }
    Ok((8 << vsew, 1 << vlmul))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vsetvl_examples() {
        let g4 = Geometry::new(4, 1024).unwrap();
        let vt = vsetvl(100, 64, 1, &g4).unwrap();
        assert_eq!((vt.vl, vt.vlmax), (64, 64));
        assert_eq!(vsetvl(16, 64, 1, &g4).unwrap().vl, 16);

        let g2 = Geometry::new(2, 1024).unwrap();
        let vt = vsetvl(1000, 8, 8, &g2).unwrap();
        assert_eq!((vt.vl, vt.vlmax), (1000, 2048));
    }

    #[test]
    fn vsetvl_rejects_bad_config() {
        let g = Geometry::default();
        assert!(matches!(vsetvl(4, 12, 1, &g), Err(Error::Config(_))));
        assert!(matches!(vsetvl(4, 64, 3, &g), Err(Error::Config(_))));
    }

    #[test]
    fn vtype_encoding_roundtrip() {
        let g = Geometry::default();
        for e in Ew::ALL {
            for lmul in [1u8, 2, 4, 8] {
                let vt = vsetvl(1, e.bits(), lmul, &g).unwrap();
                assert_eq!(decode_vtype(vt.encode()).unwrap(), (e.bits(), lmul));
            }
        }
    }

    #[test]
    fn sign_extension() {
        assert_eq!(Ew::E8.sext(0xff), -1);
        assert_eq!(Ew::E16.sext(0x7fff), 0x7fff);
        assert_eq!(Ew::E32.sext(0x8000_0000), i32::MIN as i64);
    }
}
