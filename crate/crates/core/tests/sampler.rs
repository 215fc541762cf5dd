use std::sync::Arc;

use mrs_core::expr::parse_expr;
use mrs_core::sampler::{
    build_partition, rejection_sample, AliasTable, DagShape, Partition, RefineBudget, RejectionSampler, SamplerError,
    TargetShape, DEFAULT_TRIALS_MAX,
};
use mrs_core::{Interval, IntervalBox};
use mrs_testkit::{chi_square_pvalue, ks_test, truncated_normal_cdf};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn target(expr: &str, bounds: &[(f64, f64)]) -> TargetShape {
    let dag = parse_expr(expr).unwrap().with_arity(bounds.len());
    TargetShape::single("t", IntervalBox::from_bounds(bounds).unwrap(), Arc::new(DagShape::new(dag))).unwrap()
}

fn within_3_sigma(count: u64, n: u64, p: f64) -> bool {
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - n as f64 * p).abs() <= 3.0 * sd
}

#[test]
fn alias_draws_match_weights() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for (weights, n) in [(vec![1.0, 2.0, 3.0], 30_000u64), (vec![5.0, 1.0, 3.0, 1.0], 100_000)] {
        let table = AliasTable::new(&weights).unwrap();
        let total: f64 = weights.iter().sum();
        let mut counts = vec![0u64; weights.len()];
        for _ in 0..n {
            counts[table.draw(&mut rng)] += 1;
        }
        for (c, w) in counts.iter().zip(&weights) {
            assert!(within_3_sigma(*c, n, w / total), "{counts:?} vs {weights:?}");
        }
    }
}

#[test]
fn equal_mass_pieces_are_proposed_uniformly() {
    let t = target("1", &[(0.0, 3.0)]);
    let p = Partition::uniform(&t, 3).unwrap();
    let sampler = RejectionSampler::new(&t, &p).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut counts = [0u64; 3];
    for _ in 0..30_000 {
        let (id, theta) = sampler.propose(&mut rng);
        let piece = p.piece(id);
        assert!(piece.bbox.contains_point(&theta));
        counts[theta[0].floor().min(2.0) as usize] += 1;
    }
    assert!(chi_square_pvalue(&counts, &[1.0 / 3.0; 3]) > 0.01, "{counts:?}");
}

#[test]
fn single_piece_is_always_proposed() {
    let t = target("x0 + 1", &[(0.0, 1.0)]);
    let p = Partition::new(&t).unwrap();
    let s = RejectionSampler::new(&t, &p).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    for _ in 0..100 {
        assert_eq!(s.propose(&mut rng).0, 0);
    }
}

#[test]
fn flat_target_gives_uniform_samples() {
    let t = target("3", &[(-1.0, 2.0)]);
    let p = build_partition(&t, RefineBudget::pieces(1)).unwrap();
    let run = rejection_sample(&t, &p, 5000, 3, DEFAULT_TRIALS_MAX).unwrap();
    assert_eq!(run.report.accept_rate, 1.0);
    let xs: Vec<f64> = run.samples.iter().map(|s| s.theta[0]).collect();
    assert!(ks_test(&xs, |x| (x + 1.0) / 3.0).1 > 0.001);
}

#[test]
fn gaussian_samples_pass_ks() {
    let t = target("exp(-x0^2/2)", &[(-5.0, 5.0)]);
    let p = build_partition(&t, RefineBudget::pieces(64)).unwrap();
    let run = rejection_sample(&t, &p, 10_000, 2024, DEFAULT_TRIALS_MAX).unwrap();
    let xs: Vec<f64> = run.samples.iter().map(|s| s.theta[0]).collect();
    let (_, pval) = ks_test(&xs, |x| truncated_normal_cdf(x, -5.0, 5.0));
    assert!(pval > 0.001, "KS p = {pval}");
}

#[test]
fn trial_counts_are_geometric() {
    let t = target("exp(-x0^2/2)", &[(-5.0, 5.0)]);
    let p = build_partition(&t, RefineBudget::pieces(8)).unwrap();
    let run = rejection_sample(&t, &p, 10_000, 8, DEFAULT_TRIALS_MAX).unwrap();
    let n_p = (2.0 * std::f64::consts::PI).sqrt() * (2.0 * mrs_testkit::normal_cdf(5.0) - 1.0);
    let accept = n_p / run.report.envelope_integral;
    let trials: Vec<f64> = run.samples.iter().map(|s| s.trials as f64).collect();
    let mean = trials.iter().sum::<f64>() / trials.len() as f64;
    let sd = ((1.0 - accept).sqrt() / accept) / (trials.len() as f64).sqrt();
    assert!((mean - 1.0 / accept).abs() <= 3.0 * sd, "mean {mean}, expected {}", 1.0 / accept);
    assert!(accept >= p.acceptance_lower_bound());
    assert!(n_p >= run.report.np_enclosure.lo() && n_p <= run.report.np_enclosure.hi());
}

#[test]
fn accept_rate_respects_lower_bound() {
    let t = target("1 + sin(3*x0)^2 * x1", &[(0.0, 2.0), (0.0, 1.0)]);
    let p = build_partition(&t, RefineBudget::pieces(200)).unwrap();
    let run = rejection_sample(&t, &p, 10_000, 17, DEFAULT_TRIALS_MAX).unwrap();
    let a = p.acceptance_lower_bound();
    let n = run.report.total_trials as f64;
    let sd = (a * (1.0 - a) / n).sqrt();
    assert!(run.report.accept_rate >= a - 3.0 * sd);
    assert_eq!(run.report.accept_rate, run.report.samples as f64 / n);
    // smooth target: undecidable accept tests are ulp-rare
    assert!((run.report.indeterminate as f64) / n < 1e-6);
}

#[test]
fn np_enclosure_shrinks_to_integral() {
    let t = target("x0", &[(0.0, 1.0)]);
    let mut p = Partition::new(&t).unwrap();
    let mut prev = p.np_enclosure();
    assert_eq!(prev, Interval::new(0.0, 1.0).unwrap());
    for _ in 0..2000 {
        p.refine_step(&t).unwrap();
        let np = p.np_enclosure();
        assert!(np.is_subset(&prev));
        prev = np;
    }
    assert!(prev.contains(0.5));
    assert!(prev.diameter() < 1e-3);
}

#[test]
fn flat_np_enclosure_is_thin() {
    let t = target("2", &[(0.0, 0.5), (0.0, 3.0)]);
    let p = Partition::uniform(&t, 4).unwrap();
    let np = p.np_enclosure();
    assert!(np.contains(3.0) && np.diameter() < 1e-14);
    assert_eq!(p.acceptance_lower_bound(), 1.0);
}

#[test]
fn partition_conserves_volume() {
    let t = target("exp(x0*x1) + x2^2", &[(-1.0, 1.0), (0.0, 2.0), (-3.0, 0.5)]);
    let p = build_partition(&t, RefineBudget::pieces(500)).unwrap();
    let total: f64 = p.pieces().map(|c| c.bbox.volume()).sum();
    assert!((total - 2.0 * 2.0 * 3.5).abs() < 1e-12);
}

#[test]
fn envelope_dominates_target() {
    let t = target("x0*sin((x0-3)/3) + 60", &[(-10.0, 6.0)]);
    let p = build_partition(&t, RefineBudget::pieces(100)).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let shape = &t.piece(0).shape;
    for _ in 0..10_000 {
        let x = [rng.random_range(-10.0..=6.0)];
        let envelope = p.envelope_at("t", &x).unwrap();
        assert!(envelope >= shape.eval_thin(&x).unwrap().hi());
    }
}

#[test]
fn runs_are_deterministic() {
    let t = target("exp(-(x0^2 + x1^2))", &[(-2.0, 2.0), (-2.0, 2.0)]);
    let p = build_partition(&t, RefineBudget::accept(0.5, 5000)).unwrap();
    let a = rejection_sample(&t, &p, 300, 42, DEFAULT_TRIALS_MAX).unwrap();
    let q = build_partition(&t, RefineBudget::accept(0.5, 5000)).unwrap();
    let b = rejection_sample(&t, &q, 300, 42, DEFAULT_TRIALS_MAX).unwrap();
    assert_eq!(a, b);
}

#[test]
fn enclosure_failure_names_the_box() {
    let t = target("1/(x0 - 1)", &[(0.0, 2.0)]);
    match build_partition(&t, RefineBudget::pieces(10)) {
        Err(SamplerError::EnclosureFailure { domain, .. }) => assert!(domain.side(0).contains(1.0)),
        other => panic!("unexpected {other:?}"),
    }
}

fn polynomial() -> impl Strategy<Value = String> {
    prop::collection::vec(-3i32..=3, 1..6).prop_map(|coeffs| {
        let terms: Vec<String> = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| format!("({c})*x0^{k}"))
            .collect();
        terms.join(" + ")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refinement_never_loosens(poly in polynomial(), lo in -2.0..1.0f64, w in 0.1..3.0f64) {
        let t = target(&poly, &[(lo, lo + w)]);
        let mut p = Partition::new(&t).unwrap();
        let (mut upper, mut np) = (p.np_enclosure().hi(), p.np_enclosure());
        for _ in 0..500 {
            if !p.refine_step(&t).unwrap() {
                break;
            }
            let next = p.np_enclosure();
            prop_assert!(next.hi() <= upper, "{poly}: {} > {upper}", next.hi());
            prop_assert!(next.is_subset(&np));
            upper = next.hi();
            np = next;
        }
    }

    #[test]
    fn points_map_to_their_owner(x in -10.0..=6.0f64) {
        let t = target("x0*sin((x0-3)/3) + 60", &[(-10.0, 6.0)]);
        let p = Partition::uniform(&t, 16).unwrap();
        let owner = p.owner("t", &[x]).unwrap();
        prop_assert!(owner.bbox.contains_point(&[x]));
        // no older live piece contains it
        prop_assert!(p.pieces().filter(|c| c.id < owner.id).all(|c| !c.bbox.contains_point(&[x])));
        prop_assert_eq!(p.envelope_at("t", &[x]).unwrap(), owner.enclosure.hi().max(0.0));
        prop_assert!(t.piece(0).shape.eval_real(&[x]).unwrap() <= owner.enclosure.hi());
    }
}
