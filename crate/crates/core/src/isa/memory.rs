use crate::error::{Error, Result};

/// Flat little-endian byte-addressable memory starting at address 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Memory {
    bytes: Vec<u8>,
}

impl Memory {
    pub fn new(size: usize) -> Self {
        Memory {
            bytes: vec![0; size],
        }
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Memory { bytes }
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn check(&self, addr: u64, len: usize) -> Result<()> {
        let end = addr.checked_add(len as u64);
        match end {
            Some(end) if end <= self.bytes.len() as u64 => Ok(()),
            _ => Err(Error::MemoryFault { addr, len }),
        }
    }

    pub fn read(&self, addr: u64, len: usize) -> Result<&[u8]> {
        self.check(addr, len)?;
        Ok(&self.bytes[addr as usize..addr as usize + len])
    }

    pub fn write(&mut self, addr: u64, data: &[u8]) -> Result<()> {
        self.check(addr, data.len())?;
        self.bytes[addr as usize..addr as usize + data.len()].copy_from_slice(data);
        Ok(())
    }

    /// Reads an unsigned little-endian value of `len` ≤ 8 bytes.
    pub fn read_uint(&self, addr: u64, len: usize) -> Result<u64> {
        let mut buf = [0u8; 8];
        buf[..len].copy_from_slice(self.read(addr, len)?);
        Ok(u64::from_le_bytes(buf))
    }

    pub fn write_uint(&mut self, addr: u64, len: usize, value: u64) -> Result<()> {
        self.write(addr, &value.to_le_bytes()[..len])
    }

    pub fn read_f64(&self, addr: u64) -> Result<f64> {
        Ok(f64::from_bits(self.read_uint(addr, 8)?))
    }

    pub fn write_f64(&mut self, addr: u64, v: f64) -> Result<()> {
        self.write_uint(addr, 8, v.to_bits())
    }

    pub fn read_f32(&self, addr: u64) -> Result<f32> {
        Ok(f32::from_bits(self.read_uint(addr, 4)? as u32))
    }

    pub fn write_f32(&mut self, addr: u64, v: f32) -> Result<()> {
        self.write_uint(addr, 4, v.to_bits() as u64)
    }
}
