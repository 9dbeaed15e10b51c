mod common;

use proptest::prelude::*;

use laneforge_core::frontend::FrontendConfig;
use laneforge_core::isa::{Ew, Geometry};
use laneforge_core::kernels::{run_kernel, Dtype, Kernel, KernelSpec};
use laneforge_core::multicore::partition;
use laneforge_core::reduction::intra_lane_drain_cycles;
use laneforge_core::sldu::{mux_count, reachable_sources, InterconnectKind};
use laneforge_core::timing::MachineConfig;
use laneforge_core::vrf::{byte_location, deshuffle, shuffle, LayoutConfig};

fn lanes() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 4, 8, 16])
}

fn ew() -> impl Strategy<Value = Ew> {
    prop::sample::select(vec![Ew::E8, Ew::E16, Ew::E32, Ew::E64])
}

proptest! {
    #[test]
    fn drain_matches_event_simulation(r in 1u64..=64) {
        prop_assert_eq!(intra_lane_drain_cycles(r), common::drain_oracle(r));
    }

    #[test]
    fn layout_is_a_bijection(l in lanes(), e in ew(), bp: bool, seed: u64) {
        let cfg = LayoutConfig::new(&Geometry::new(l, 1024).unwrap(), bp).unwrap();
        let img: Vec<u8> = (0..cfg.vlenb()).map(|i| (i as u64).wrapping_mul(seed | 1).to_le_bytes()[1]).collect();
        prop_assert_eq!(deshuffle(&shuffle(&img, e, &cfg), e, &cfg), img);

        let reg = (seed % 32) as u8;
        let mut seen = std::collections::HashSet::new();
        for elem in 0..cfg.vlenb() / e.bytes() {
            let loc = byte_location(reg, elem, e, &cfg).unwrap();
            prop_assert_eq!(loc.lane, elem % l);
            prop_assert!(loc.bank < cfg.banks_per_lane);
            prop_assert!(seen.insert((loc.lane, loc.bank, loc.row, loc.offset)));
        }
    }

    #[test]
    fn smaller_interconnects_reach_subsets(l in lanes(), frac in 0.0f64..1.0) {
        use InterconnectKind::*;
        let out = (frac * (8 * l) as f64) as usize;
        let chain = [Slide1Timemux, Slide1Combined, SlideP2Combined, AllToAll];
        for w in chain.windows(2) {
            prop_assert!(reachable_sources(w[0], l, out).is_subset(&reachable_sources(w[1], l, out)));
            prop_assert!(mux_count(w[0], l) <= mux_count(w[1], l));
        }
        prop_assert!(reachable_sources(SlideP2Timemux, l, out).is_subset(&reachable_sources(SlideP2Combined, l, out)));
    }

    #[test]
    fn partition_covers_rows(n in 1usize..300, cores in 1usize..20) {
        let p = partition(n, cores);
        prop_assert_eq!(p.len(), cores);
        let mut next = 0;
        for b in &p {
            prop_assert_eq!(b.start, next);
            next += b.len;
        }
        prop_assert_eq!(next, n);
        let max = p.iter().map(|b| b.len).max().unwrap();
        let min_active = p.iter().map(|b| b.len).filter(|&x| x > 0).min().unwrap();
        prop_assert!(max - min_active <= 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Every generated kernel verifies its result, and the ideal dispatcher
    /// is never slower than the in-order core.
    #[test]
    fn kernels_verify_in_both_modes(
        k in prop::sample::select(Kernel::ALL.to_vec()),
        d in prop::sample::select(Dtype::ALL.to_vec()),
        l in lanes(),
        quarter in 2usize..=8,
        bp: bool,
        seed: u64,
    ) {
        let mut spec = KernelSpec::new(k, d, 4 * quarter);
        spec.seed = seed;
        let mut m = MachineConfig::new(l);
        m.barber_pole = bp;
        let cva6 = run_kernel(&spec, &m, &FrontendConfig::default());
        let ideal = run_kernel(&spec, &m, &FrontendConfig::ideal());
        match (cva6, ideal) {
            (Ok(c), Ok(i)) => {
                prop_assert!(i.cycles <= c.cycles, "ideal {} > cva6 {}", i.cycles, c.cycles);
                prop_assert_eq!(c.flops, spec.flops());
            }
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            (a, b) => prop_assert!(false, "modes disagree: {:?} / {:?}", a.err(), b.err()),
        }
    }
}
