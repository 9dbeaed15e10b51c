use crate::isa::Ew;
use crate::timing::MachineConfig;

/// Round-robin arbiter in front of the banks of one lane.
#[derive(Clone, Debug)]
pub struct BankArbiter {
    /// Requester with the highest priority at each bank.
    next: Vec<usize>,
    requesters: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Arbitration {
    pub grants: Vec<bool>,
    pub stalls: u64,
}

impl BankArbiter {
    pub fn new(banks: usize, requesters: usize) -> Self {
        BankArbiter {
            next: vec![0; banks],
            requesters,
        }
    }

    /// Grants at most one request per bank. `requests[i]` is the bank
    /// requester `i` wants this cycle.
    pub fn arbitrate(&mut self, requests: &[Option<usize>]) -> Arbitration {
        debug_assert!(requests.len() <= self.requesters);
        let n = self.requesters;
        let mut winner: Vec<Option<usize>> = vec![None; self.next.len()];
        for (i, r) in requests.iter().enumerate() {
            let Some(b) = *r else { continue };
            let rank = |x: usize| (x + n - self.next[b]) % n;
            if winner[b].is_none_or(|w| rank(i) < rank(w)) {
                winner[b] = Some(i);
            }
        }
        let mut out = Arbitration {
            grants: vec![false; requests.len()],
            stalls: 0,
        };
        for (b, w) in winner.iter().enumerate() {
            if let Some(w) = *w {
                out.grants[w] = true;
                self.next[b] = (w + 1) % n;
            }
        }
        out.stalls = requests.iter().filter(|r| r.is_some()).count() as u64
            - out.grants.iter().filter(|&&g| g).count() as u64;
        out
    }
}

/// One-shot arbitration with fresh priorities.
pub fn arbitrate_banks(requests: &[Option<usize>], banks: usize) -> Arbitration {
    BankArbiter::new(banks, requests.len().max(1)).arbitrate(requests)
}

/// Banks a lane actually touches when streaming `vl` elements.
pub fn effective_banks(vl: usize, eew: Ew, cfg: &MachineConfig) -> usize {
    if cfg.barber_pole {
        return cfg.banks_per_lane;
    }
    let per_lane = vl.div_ceil(cfg.lanes);
    let words = (per_lane * eew.bits() as usize).div_ceil(64);
    words.clamp(1, cfg.banks_per_lane)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_banks_all_granted() {
        let a = arbitrate_banks(&[Some(0), Some(3)], 8);
        assert_eq!(a.grants, vec![true, true]);
        assert_eq!(a.stalls, 0);
    }

    #[test]
    fn same_bank_one_stall() {
        let a = arbitrate_banks(&[Some(2), Some(2)], 8);
        assert_eq!(a.grants, vec![true, false]);
        assert_eq!(a.stalls, 1);
    }

    #[test]
    fn round_robin_rotates() {
        let mut arb = BankArbiter::new(8, 3);
        let req = [Some(1), Some(1), Some(1)];
        let order: Vec<usize> = (0..6)
            .map(|_| arb.arbitrate(&req).grants.iter().position(|&g| g).unwrap())
            .collect();
        assert_eq!(order, vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn effective_bank_examples() {
        let c = MachineConfig::new(16);
        assert_eq!(effective_banks(128, Ew::E64, &c), 8);
        assert_eq!(effective_banks(16, Ew::E64, &c), 1);
        assert_eq!(effective_banks(64, Ew::E64, &c), 4);
        assert_eq!(effective_banks(0, Ew::E64, &c), 1);
        let bp = MachineConfig {
            barber_pole: true,
            ..c
        };
        assert_eq!(effective_banks(16, Ew::E64, &bp), 8);
    }
}
