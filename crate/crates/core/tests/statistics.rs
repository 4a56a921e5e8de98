mod common;

use std::f64::consts::PI;

use common::{chi_square_p, ks_critical_001, ks_statistic, spin_glass, state_counts};
use perturbmap::baselines::{
    gibbs_chain, metropolis_chain, parallel_chains, ChainConfig, ChainInit, SiteKernel,
};
use perturbmap::bounds::{
    lower_bound_expected, lower_bound_probable, mean_std_error, singleton_subsets, upper_bound,
};
use perturbmap::exact::{
    empirical_vertex_marginals, log_partition, log_sum_exp, mean_vertex_tv, ExactOracle, Indexer,
};
use perturbmap::map::Strategy;
use perturbmap::perturbation::{gumbel_cdf, PerturbScheme};
use perturbmap::samplers::{
    acceptance_rate, approx_map_batch, estimate_logz_full, gumbel_max_batch, make_bound_family,
    unbiased_sample, FamilyKind, SamplerKind,
};
use perturbmap::{Assignment, PairwiseModel, SeedPath};
use rand::Rng;

const GUMBEL_VARIANCE: f64 = PI * PI / 6.0;

#[test]
fn uniform_pair_is_equiprobable() {
    let m = PairwiseModel::uniform(vec![2, 2], vec![(0, 1)]).unwrap();
    let batch = gumbel_max_batch(&m, 40_000, &SeedPath::new(1)).unwrap();
    let counts = state_counts(m.domain_sizes(), &batch.samples);
    assert!(chi_square_p(&counts, &[0.25; 4]) > 1e-3, "{counts:?}");
}

#[test]
fn single_draw_estimator_is_gumbel_around_logz() {
    let m = spin_glass(2, 2, 1.0, 3);
    let logz = log_partition(&m).unwrap();
    let root = SeedPath::new(11);
    let n = 20_000;
    let mut draws: Vec<f64> = (0..n as u64)
        .map(|k| estimate_logz_full(&m, 1, &root.child(k)).unwrap().value)
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    // the excess kurtosis of a Gumbel is 12/5
    let var_se = GUMBEL_VARIANCE * (4.4 / n as f64).sqrt();
    assert!(
        (mean - logz).abs() < 3.0 * (GUMBEL_VARIANCE / n as f64).sqrt(),
        "mean {mean} vs {logz}"
    );
    assert!(
        (var - GUMBEL_VARIANCE).abs() < 3.0 * var_se,
        "variance {var}"
    );
    let d = ks_statistic(&mut draws, |t| gumbel_cdf(t - logz));
    assert!(d < ks_critical_001(n), "KS {d}");
}

#[test]
fn last_level_of_mc_family_matches_log_sum_exp() {
    let m = spin_glass(1, 2, 1.5, 8);
    let samples = 10_000;
    let fam = make_bound_family(
        &m,
        None,
        FamilyKind::GumbelMc { samples },
        Strategy::Auto,
        &SeedPath::new(5),
    )
    .unwrap();
    for x0 in 0..2 {
        let terms: Vec<f64> = (0..2)
            .map(|x1| m.energy(&Assignment::new(vec![x0, x1])).unwrap())
            .collect();
        let got = fam.evaluate(&[x0]).unwrap().value;
        let tol = 3.0 * PI / (6.0 * samples as f64).sqrt();
        assert!(
            (got - log_sum_exp(&terms)).abs() < tol,
            "x0={x0}: {got} vs {}",
            log_sum_exp(&terms)
        );
    }
}

#[test]
fn single_configuration_acceptance_matches_path_product() {
    let ninf = f64::NEG_INFINITY;
    let m = PairwiseModel::independent(vec![vec![ninf, 0.3, ninf], vec![0.2, ninf]]).unwrap();
    let fam = make_bound_family(
        &m,
        None,
        FamilyKind::GumbelMc { samples: 20 },
        Strategy::Auto,
        &SeedPath::new(9),
    )
    .unwrap();
    let path = [vec![], vec![1], vec![1, 0]];
    let levels: Vec<f64> = path
        .iter()
        .map(|p| fam.evaluate(p).unwrap().value)
        .collect();
    assert_eq!(levels[2], 0.5);
    // each step offers one feasible label, so a step above one renormalizes to one
    let expected: f64 = levels
        .windows(2)
        .map(|w| (w[1] - w[0]).exp().min(1.0))
        .product();
    if levels.windows(2).all(|w| w[1] <= w[0]) {
        assert!((expected - (0.5 - levels[0]).exp()).abs() < 1e-12);
    }
    let est = acceptance_rate(&fam, 20_000, &mut SeedPath::new(10).rng()).unwrap();
    let sigma = (expected * (1.0 - expected) / 20_000.0).sqrt();
    assert!(
        (est.rate - expected).abs() <= 3.0 * sigma + 1e-12,
        "rate {} vs {expected}",
        est.rate
    );
}

#[test]
fn rejection_counts_are_geometric() {
    let m = spin_glass(2, 2, 1.0, 4);
    let fam = make_bound_family(
        &m,
        None,
        FamilyKind::GumbelMc { samples: 500 },
        Strategy::Auto,
        &SeedPath::new(2),
    )
    .unwrap();
    let est = acceptance_rate(&fam, 20_000, &mut SeedPath::new(3).rng()).unwrap();
    let mut rng = SeedPath::new(4).rng();
    let restarts: Vec<f64> = (0..10_000)
        .map(|_| unbiased_sample(&fam, &mut rng, 100_000).unwrap().restarts as f64)
        .collect();
    let (mean, se_mean) = mean_std_error(&restarts);
    let r = est.rate;
    let sigma = ((r * se_mean).powi(2) + ((mean + 1.0) * est.std_error).powi(2)).sqrt();
    assert!(
        (mean * r - (1.0 - r)).abs() < 3.0 * sigma,
        "mean {mean}, rate {r}"
    );
}

#[test]
fn transitions_satisfy_detailed_balance() {
    let m = PairwiseModel::new(
        vec![2, 2],
        vec![vec![0.0, 0.7], vec![-0.4, 0.3]],
        vec![(0, 1)],
        vec![vec![vec![0.9, -0.2], vec![0.1, 0.5]]],
    )
    .unwrap();
    let idx = Indexer::new(m.domain_sizes());
    let pi = ExactOracle::default().distribution(&m).unwrap();
    let kernel = SiteKernel::new(&m);
    for metropolis in [false, true] {
        let mut rng = SeedPath::new(metropolis as u64).rng();
        let mut visits = [0u64; 4];
        let mut moves = [[0u64; 4]; 4];
        for _ in 0..1_000_000 {
            let from = rng.gen_range(0..4);
            let mut x = idx.assignment(from).0;
            let v = rng.gen_range(0..2);
            if metropolis {
                kernel.metropolis_step(&mut x, v, &mut rng);
            } else {
                kernel.gibbs_step(&mut x, v, &mut rng);
            }
            visits[from] += 1;
            moves[from][idx.index(&Assignment::new(x))] += 1;
        }
        for a in 0..4 {
            for b in a + 1..4 {
                let (xa, xb) = (idx.assignment(a), idx.assignment(b));
                if xa.0.iter().zip(&xb.0).filter(|(p, q)| p != q).count() != 1 {
                    continue;
                }
                let p = |s: usize, t: usize| moves[s][t] as f64 / visits[s] as f64;
                let se = |s: usize, t: usize| (p(s, t) * (1.0 - p(s, t)) / visits[s] as f64).sqrt();
                let lhs = pi[a] * p(a, b);
                let rhs = pi[b] * p(b, a);
                let sigma = ((pi[a] * se(a, b)).powi(2) + (pi[b] * se(b, a)).powi(2)).sqrt();
                assert!(
                    (lhs - rhs).abs() < 3.0 * sigma,
                    "metropolis={metropolis} {a}->{b}: {lhs} vs {rhs}"
                );
            }
        }
    }
}

#[test]
fn chains_leave_exact_distribution_invariant() {
    let m = spin_glass(2, 3, 1.0, 7);
    let pi = ExactOracle::default().distribution(&m).unwrap();
    let sampler = ExactOracle::default().sampler(&m).unwrap();
    let root = SeedPath::new(21);
    for metropolis in [false, true] {
        let mut finals = Vec::with_capacity(10_000);
        for k in 0..10_000u64 {
            let mut rng = root.descend(&[metropolis as u64, k]).rng();
            let start = sampler.sample(&mut rng);
            let cfg = ChainConfig {
                burn_in: 9,
                init: ChainInit::Fixed(start),
                ..ChainConfig::new(10)
            };
            let batch = if metropolis {
                metropolis_chain(&m, &cfg, &mut rng)
            } else {
                gibbs_chain(&m, &cfg, &mut rng)
            };
            finals.extend(batch.unwrap().samples);
        }
        let p = chi_square_p(&state_counts(m.domain_sizes(), &finals), &pi);
        assert!(p > 1e-3, "metropolis={metropolis}: p = {p}");
    }
}

#[test]
fn mcmc_marginals_converge_at_low_coupling() {
    let m = spin_glass(3, 3, 0.5, 1);
    let exact = ExactOracle::default().vertex_marginals(&m).unwrap();
    for (sampler, limit) in [(SamplerKind::Gibbs, 0.02), (SamplerKind::Metropolis, 0.03)] {
        let batch = parallel_chains(
            &m,
            &ChainConfig::new(100_000),
            sampler,
            1,
            &SeedPath::new(6),
        )
        .unwrap();
        let tv = mean_vertex_tv(
            &empirical_vertex_marginals(m.domain_sizes(), &batch.samples),
            &exact,
        );
        assert!(tv < limit, "{sampler:?}: {tv}");
    }
}

#[test]
fn unary_perturbation_sampler_is_close_at_unit_coupling() {
    let m = spin_glass(3, 3, 1.0, 1);
    let exact = ExactOracle::default().vertex_marginals(&m).unwrap();
    let batch = approx_map_batch(
        &m,
        PerturbScheme::Unary,
        Strategy::Auto,
        100_000,
        &SeedPath::new(8),
    )
    .unwrap();
    let tv = mean_vertex_tv(
        &empirical_vertex_marginals(m.domain_sizes(), &batch.samples),
        &exact,
    );
    assert!(tv < 0.15, "{tv}");
}

#[test]
fn averaged_noise_is_dominated_by_single_subset_bounds() {
    let m = spin_glass(3, 3, 1.0, 2);
    let n = m.num_vertices();
    let samples = 2000;
    let seed = SeedPath::new(12);
    let averaged =
        lower_bound_expected(&m, &singleton_subsets(n), samples, Strategy::Auto, &seed).unwrap();
    let singles: Vec<_> = (0..n)
        .map(|i| lower_bound_expected(&m, &[vec![i]], samples, Strategy::Auto, &seed).unwrap())
        .collect();
    let mean_single = singles.iter().map(|b| b.value).sum::<f64>() / n as f64;
    let var_single = singles
        .iter()
        .map(|b| b.std_error.unwrap().powi(2))
        .sum::<f64>()
        / (n * n) as f64;
    let sigma = (averaged.std_error.unwrap().powi(2) + var_single).sqrt();
    // max of an average never exceeds the average of maxima
    assert!(
        averaged.value <= mean_single + 3.0 * sigma,
        "{} vs {mean_single}",
        averaged.value
    );
    let logz = log_partition(&m).unwrap();
    assert!(averaged.value - 3.0 * averaged.std_error.unwrap() <= logz);
}

#[test]
fn probable_lower_bound_mean_is_below_upper_mean() {
    let m = spin_glass(3, 3, 1.0, 5);
    let replicas = vec![5; m.num_vertices()];
    let root = SeedPath::new(13);
    let draws: Vec<f64> = (0..40u64)
        .map(|k| {
            lower_bound_probable(&m, &replicas, Strategy::Auto, &mut root.child(k).rng())
                .unwrap()
                .value
        })
        .collect();
    let (lower, _) = mean_std_error(&draws);
    let upper = upper_bound(&m, 1000, Strategy::Auto, &SeedPath::new(14)).unwrap();
    assert!(lower <= upper.value, "{lower} vs {}", upper.value);
}
