//! Static instruction counts of the strip-mined dot product loop in RVV and
//! in Arm SVE. The SVE side is a listing only; nothing executes it.

/// RVV dot product instructions executed for `strips` strip-mine iterations.
pub fn rvv_dotproduct_count(strips: usize) -> usize {
    7 + 9 * strips
}

/// The SVE listing for `strips` iterations, one instruction per line.
pub fn sve_dotproduct_listing(strips: usize) -> Vec<String> {
    let mut out = vec![
        "mov x8, xzr".to_string(),
        "mov z0.d, #0".to_string(),
        "cntd x9".to_string(),
    ];
    for _ in 0..strips {
        out.extend(
            [
                "whilelo p0.d, x8, x0",
                "ld1d {z1.d}, p0/z, [x1, x8, lsl #3]",
                "ld1d {z2.d}, p0/z, [x2, x8, lsl #3]",
                "fmla z0.d, p0/m, z1.d, z2.d",
                "incd x8",
                "cmp x8, x0",
                "b.lo .loop",
            ]
            .map(String::from),
        );
    }
    out.extend(["ptrue p0.d", "faddv d0, p0, z0.d", "ret"].map(String::from));
    out
}

pub fn sve_dotproduct_count(strips: usize) -> usize {
    sve_dotproduct_listing(strips).len()
}
