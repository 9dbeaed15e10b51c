use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Set-associative cache geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheConfig {
    pub size: usize,
    pub sets: usize,
    pub line: usize,
}

impl CacheConfig {
    pub const ICACHE: CacheConfig = CacheConfig {
        size: 4096,
        sets: 4,
        line: 16,
    };
    pub const DCACHE: CacheConfig = CacheConfig {
        size: 8192,
        sets: 4,
        line: 32,
    };

    pub fn ways(&self) -> usize {
        self.size / (self.sets * self.line)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sets == 0 || self.line == 0 || !self.size.is_multiple_of(self.sets * self.line) {
            return Err(Error::Config(format!(
                "cache of {} B cannot be split into {} sets of {} B lines",
                self.size, self.sets, self.line
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccessKind {
    Ifetch,
    Load,
    Store,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Line {
    tag: u64,
    valid: bool,
    last_use: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    /// Lines covered by set invalidations, valid or not.
    pub invalidated_lines: u64,
    /// Valid lines actually dropped by set invalidations.
    pub dropped_lines: u64,
}

/// LRU, write-through, no-write-allocate cache.
#[derive(Clone, Debug)]
pub struct Cache {
    cfg: CacheConfig,
    lines: Vec<Line>,
    clock: u64,
    pub stats: CacheStats,
}

impl Cache {
    pub fn new(cfg: CacheConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Cache {
            cfg,
            lines: vec![Line::default(); cfg.sets * cfg.ways()],
            clock: 0,
            stats: CacheStats::default(),
        })
    }

    pub fn config(&self) -> CacheConfig {
        self.cfg
    }

    fn index(&self, addr: u64) -> (usize, u64) {
        let line = addr / self.cfg.line as u64;
        ((line % self.cfg.sets as u64) as usize, line / self.cfg.sets as u64)
    }

    fn set_mut(&mut self, set: usize) -> &mut [Line] {
        let w = self.cfg.ways();
        &mut self.lines[set * w..(set + 1) * w]
    }

    pub fn contains(&self, addr: u64) -> bool {
        let (set, tag) = self.index(addr);
        let w = self.cfg.ways();
        self.lines[set * w..(set + 1) * w]
            .iter()
            .any(|l| l.valid && l.tag == tag)
    }

    /// Looks up `addr`; returns true on a hit. Loads and fetches allocate on
    /// a miss, stores never allocate.
    pub fn access(&mut self, addr: u64, kind: AccessKind) -> bool {
        self.clock += 1;
        let now = self.clock;
        let (set, tag) = self.index(addr);
        let lines = self.set_mut(set);
        if let Some(l) = lines.iter_mut().find(|l| l.valid && l.tag == tag) {
            l.last_use = now;
            self.stats.hits += 1;
            return true;
        }
        if kind != AccessKind::Store {
            let victim = lines
                .iter_mut()
                .min_by_key(|l| (l.valid, l.last_use))
                .expect("cache has at least one way");
            *victim = Line {
                tag,
                valid: true,
                last_use: now,
            };
        }
        self.stats.misses += 1;
        false
    }

    /// Invalidates every set indexed by `[addr, addr + len)`; returns the
    /// number of lines covered.
    pub fn invalidate_range(&mut self, addr: u64, len: usize) -> usize {
        self.invalidate_accesses([(addr, len)])
    }

    /// Invalidates the sets indexed by a list of element accesses.
    pub fn invalidate_accesses(&mut self, accesses: impl IntoIterator<Item = (u64, usize)>) -> usize {
        let mut touched = vec![false; self.cfg.sets];
        for (addr, len) in accesses {
            if len == 0 {
                continue;
            }
            let line = self.cfg.line as u64;
            for l in addr / line..=(addr + len as u64 - 1) / line {
                touched[(l % self.cfg.sets as u64) as usize] = true;
            }
        }
        let ways = self.cfg.ways();
        let mut count = 0;
        for (set, t) in touched.into_iter().enumerate() {
            if t {
                let mut dropped = 0;
                for l in self.set_mut(set) {
                    dropped += l.valid as u64;
                    l.valid = false;
                }
                self.stats.dropped_lines += dropped;
                count += ways;
            }
        }
        self.stats.invalidated_lines += count as u64;
        count
    }
}
