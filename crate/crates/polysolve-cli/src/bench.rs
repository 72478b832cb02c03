//! Benchmark runs: a dense random system of chosen size is generated,
//! solved in affine mode, and summarized as one CSV row of matrix sizes,
//! accuracy, and stage timings.

use polysolve::linalg::{c64, standard_normal};
use polysolve::macaulay::MonomialIndex;
use polysolve::poly::{Polynomial, PolynomialSystem, Term};
use polysolve::quotient::QuotientConfig;
use polysolve::solve::{solve, SolveConfig};
use polysolve::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::output::fmt_sig;

pub const BENCH_HEADER: &str = "delta,m1,m2,n2,res,delta_alg,t_M,t_N,t_B,t_S,t_alg";

/// Dense system in n variables of degree d: every monomial of degree at most
/// d appears, with independent standard normal real coefficients drawn from
/// the seed. The same (n, d, seed) always yields the same system.
pub fn dense_system(n: usize, d: i32, seed: u64) -> PolynomialSystem {
    let support = MonomialIndex::deg_at_most(n, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polys = (0..n)
        .map(|_| {
            Polynomial::new(
                n,
                support
                    .monomials()
                    .iter()
                    .map(|e| Term {
                        coeff: c64(standard_normal(&mut rng), 0.0),
                        exps: e.clone(),
                    })
                    .collect(),
            )
        })
        .collect();
    PolynomialSystem::new(polys).expect("the dense generator builds a square system")
}

/// Generates, solves, and formats one benchmark row matching `BENCH_HEADER`:
/// root count, matrix rows and columns, basis size, worst residual, root
/// count with multiplicity, and the stage timings in seconds.
pub fn bench_row(n: usize, d: i32, seed: u64, max_entries: usize) -> Result<String, Error> {
    let system = dense_system(n, d, seed);
    let cfg = SolveConfig {
        quotient: QuotientConfig { seed, max_entries, ..QuotientConfig::default() },
        ..SolveConfig::default()
    };
    let report = solve(&system, &cfg)?;
    let set = &report.roots;
    let res = set.roots.iter().map(|r| r.residual).fold(0.0f64, f64::max);
    let delta_alg: usize = set.roots.iter().map(|r| r.multiplicity).sum();
    let t = &set.timings;
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        report.delta,
        report.matrix_shape.0,
        report.matrix_shape.1,
        report.delta,
        fmt_sig(res),
        delta_alg,
        fmt_sig(t.t_matrix),
        fmt_sig(t.t_null),
        fmt_sig(t.t_basis),
        fmt_sig(t.t_schur),
        fmt_sig(report.t_total),
    ))
}
