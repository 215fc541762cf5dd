use mrs_core::interval::{Interval, IntervalBox};
use mrs_core::phylo::{
    clocked_triplet_branches, clocked_triplet_site_likelihood, dataset_log_shape, hky_transition, jc_transition,
    pattern_likelihood_normalization, quartet_site_likelihood, transition_matrix, triplet_site_likelihood,
    DomainBounds, Nucleotide, QuartetTopology, SitePattern, SitePatternData, SubstModel, TreeClass, TreeShape,
};
use mrs_core::sampler::Shape;
use mrs_testkit::{identity4, matmul4, matrix_exp4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NEANDERTAL_FREQS: [f64; 4] = [0.2588, 0.2571, 0.2916, 0.1925];

fn pat(s: &str) -> Vec<Nucleotide> {
    SitePattern::parse(s).unwrap().0
}

fn hky() -> SubstModel {
    SubstModel::hky(NEANDERTAL_FREQS, 2.0).unwrap()
}

/// Rate matrix with unit mean rate, built from scratch: order t, c, a, g;
/// transitions are t<->c and a<->g.
#[allow(clippy::needless_range_loop)]
fn rate_matrix(freqs: [f64; 4], kappa: f64) -> [[f64; 4]; 4] {
    let mut q = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                let transition = (i < 2) == (j < 2);
                q[i][j] = freqs[j] * if transition { kappa } else { 1.0 };
            }
        }
        q[i][i] = -q[i].iter().sum::<f64>();
    }
    let rate: f64 = (0..4).map(|i| -freqs[i] * q[i][i]).sum();
    q.map(|row| row.map(|v| v / rate))
}

fn oracle_transition(freqs: [f64; 4], kappa: f64, t: f64) -> [[f64; 4]; 4] {
    matrix_exp4(rate_matrix(freqs, kappa).map(|row| row.map(|v| v * t)))
}

fn max_diff(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> f64 {
    (0..16).map(|k| (a[k / 4][k % 4] - b[k / 4][k % 4]).abs()).fold(0.0, f64::max)
}

#[test]
fn transitions_match_matrix_exponential() {
    let jc = jc_transition(0.1).unwrap();
    assert!(max_diff(&jc, &oracle_transition([0.25; 4], 1.0, 0.1)) < 1e-10);
    for t in [0.01, 0.1, 0.7, 3.0] {
        let p = hky_transition(t, &hky()).unwrap();
        assert!(max_diff(&p, &oracle_transition(NEANDERTAL_FREQS, 2.0, t)) < 1e-10, "t = {t}");
    }
}

#[test]
fn transition_limits_and_identity() {
    assert_eq!(jc_transition(0.0).unwrap(), identity4());
    assert!(max_diff(&hky_transition(0.0, &hky()).unwrap(), &identity4()) < 1e-15);
    let far = jc_transition(1e3).unwrap();
    assert!(far.iter().flatten().all(|v| (v - 0.25).abs() < 1e-12));
    assert!(jc_transition(-0.1).is_err());
    assert!(hky_transition(-0.1, &hky()).is_err());
}

#[test]
fn rows_are_stochastic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let t = rng.random::<f64>() * 10.0;
        for p in [jc_transition(t).unwrap(), hky_transition(t, &hky()).unwrap()] {
            for row in p {
                assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
        let lo = rng.random::<f64>() * 5.0;
        let ti = Interval::new(lo, lo + rng.random::<f64>()).unwrap();
        for m in [SubstModel::jc(), hky()] {
            for row in transition_matrix(&m, ti) {
                let sum = row.into_iter().fold(Interval::ZERO, |a, b| a + b);
                assert!(sum.contains(1.0), "{sum:?}");
            }
        }
    }
}

#[test]
fn chapman_kolmogorov() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let (a, b) = (rng.random::<f64>() * 2.0, rng.random::<f64>() * 2.0);
        let jc = matmul4(&jc_transition(a).unwrap(), &jc_transition(b).unwrap());
        assert!(max_diff(&jc, &jc_transition(a + b).unwrap()) <= 1e-10);
        let m = hky();
        let h = matmul4(&hky_transition(a, &m).unwrap(), &hky_transition(b, &m).unwrap());
        assert!(max_diff(&h, &hky_transition(a + b, &m).unwrap()) <= 1e-10);
    }
}

#[test]
fn hky_is_reversible() {
    let m = hky();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let p = hky_transition(rng.random::<f64>() * 5.0, &m).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((NEANDERTAL_FREQS[i] * p[i][j] - NEANDERTAL_FREQS[j] * p[j][i]).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn hky_nests_jc() {
    let m = SubstModel::hky([0.25; 4], 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let t = rng.random::<f64>() * 10.0;
        assert!(max_diff(&hky_transition(t, &m).unwrap(), &jc_transition(t).unwrap()) <= 1e-12);
        let b = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        let x = pat("agt");
        assert!((triplet_site_likelihood(&m, &x, b) - triplet_site_likelihood(&SubstModel::jc(), &x, b)).abs() <= 1e-12);
    }
}

/// `Σ_r π_r Π_k P_{r,x_k}` written out term by term.
#[test]
#[allow(clippy::needless_range_loop)]
fn triplet_matches_brute_force() {
    for m in [SubstModel::jc(), hky()] {
        let b = [0.1, 0.2, 0.3];
        let p: Vec<_> = b.iter().map(|&t| oracle_transition(m.freqs(), m.kappa(), t)).collect();
        let x = pat("aag").iter().map(|n| n.index()).collect::<Vec<_>>();
        let mut direct = 0.0;
        for r in 0..4 {
            direct += m.freqs()[r] * p[0][r][x[0]] * p[1][r][x[1]] * p[2][r][x[2]];
        }
        assert!((triplet_site_likelihood(&m, &pat("aag"), b) - direct).abs() < 1e-12);
    }
}

#[test]
fn quartet_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [SubstModel::jc(), hky()] {
        for _ in 0..50 {
            let b: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>() * 2.0);
            let p: Vec<_> = b.iter().map(|&t| oracle_transition(m.freqs(), m.kappa(), t)).collect();
            let labels = pat("acgt");
            let x: Vec<usize> = labels.iter().map(|n| n.index()).collect();
            for topo in QuartetTopology::ALL {
                let ([a1, a2], [b1, b2]) = topo.sides();
                let mut direct = 0.0;
                for u in 0..4 {
                    for v in 0..4 {
                        direct += m.freqs()[u]
                            * p[a1][u][x[a1]]
                            * p[a2][u][x[a2]]
                            * p[4][u][v]
                            * p[b1][v][x[b1]]
                            * p[b2][v][x[b2]];
                    }
                }
                let got = quartet_site_likelihood(&m, &labels, topo, b);
                assert!((got - direct).abs() < 1e-12, "{topo:?}: {got} vs {direct}");
            }
        }
    }
}

#[test]
fn quartet_topologies_agree_at_zero_internal_edge() {
    let m = hky();
    let b = [0.3, 0.1, 0.7, 0.2, 0.0];
    for x in ["acgt", "aacc", "acac", "ggta"] {
        let v: Vec<f64> = QuartetTopology::ALL
            .iter()
            .map(|&t| quartet_site_likelihood(&m, &pat(x), t, b))
            .collect();
        // star tree on four leaves
        let p: Vec<_> = b[..4].iter().map(|&t| hky_transition(t, &m).unwrap()).collect();
        let xi: Vec<usize> = pat(x).iter().map(|n| n.index()).collect();
        let star: f64 = (0..4)
            .map(|r| m.freqs()[r] * (0..4).map(|k| p[k][r][xi[k]]).product::<f64>())
            .sum();
        for vi in v {
            assert!((vi - star).abs() < 1e-14);
        }
    }
}

#[test]
fn quartet_relabelling_symmetry() {
    // swapping taxa 2 and 3 maps 13|24 to 14|23 and fixes 12|34
    let m = hky();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let b: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>());
        let x: Vec<Nucleotide> = (0..4).map(|_| Nucleotide::from_index(rng.random_range(0..4))).collect();
        let swapped_x = vec![x[0], x[1], x[3], x[2]];
        let swapped_b = [b[0], b[1], b[3], b[2], b[4]];
        let pairs = [
            (QuartetTopology::T12_34, QuartetTopology::T12_34),
            (QuartetTopology::T13_24, QuartetTopology::T14_23),
            (QuartetTopology::T14_23, QuartetTopology::T13_24),
        ];
        for (t, s) in pairs {
            let a = quartet_site_likelihood(&m, &x, t, b);
            let c = quartet_site_likelihood(&m, &swapped_x, s, swapped_b);
            assert!((a - c).abs() <= 1e-15 * a.max(1e-300) + 1e-17);
        }
    }
}

#[test]
fn rooted_triplet_obeys_pulley_principle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in [SubstModel::jc(), hky()] {
        for _ in 0..200 {
            let split = rng.random::<f64>();
            let root = split + rng.random::<f64>();
            let gamma = rng.random::<f64>();
            let b = clocked_triplet_branches(split, root, Some(gamma)).unwrap();
            // the root may slide onto the outgroup edge
            let unrooted = [b[0], b[1], b[2] + b[3]];
            for x in ["aag", "tca", "ggg", "cat"] {
                let rooted = clocked_triplet_site_likelihood(&m, &pat(x), b);
                let star = triplet_site_likelihood(&m, &pat(x), unrooted);
                assert!((rooted - star).abs() <= 1e-12, "{x}: {rooted} vs {star}");
            }
        }
    }
}

#[test]
fn likelihood_normalizes_over_patterns() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for m in [SubstModel::jc(), hky()] {
        for _ in 0..20 {
            let b3: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 3.0).collect();
            assert!((pattern_likelihood_normalization(&m, &b3, 3) - 1.0).abs() <= 1e-12);
            let b5: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * 3.0).collect();
            assert!((pattern_likelihood_normalization(&m, &b5, 4) - 1.0).abs() <= 1e-12);
        }
        assert!((pattern_likelihood_normalization(&m, &[0.0; 3], 3) - 1.0).abs() <= 1e-12);
        let constant: f64 = ["ttt", "ccc", "aaa", "ggg"]
            .iter()
            .map(|x| triplet_site_likelihood(&m, &pat(x), [0.0; 3]))
            .sum();
        assert!((constant - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn interval_likelihood_encloses_real() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let models = [SubstModel::jc(), hky()];
    for i in 0..10_000 {
        let m = &models[i % 2];
        let x: Vec<Nucleotide> = (0..4).map(|_| Nucleotide::from_index(rng.random_range(0..4))).collect();
        let lo: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>() * 3.0);
        let w: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>() * 0.5);
        let u: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>());
        let point: [f64; 5] = std::array::from_fn(|k| (lo[k] + u[k] * w[k]).min(lo[k] + w[k]));
        let boxed: [Interval; 5] = std::array::from_fn(|k| Interval::new(lo[k], lo[k] + w[k]).unwrap());

        let real = triplet_site_likelihood(m, &x[..3], [point[0], point[1], point[2]]);
        let enc = triplet_site_likelihood(m, &x[..3], [boxed[0], boxed[1], boxed[2]]);
        assert!(enc.contains(real), "{real} not in {enc:?}");

        let topo = QuartetTopology::ALL[i % 3];
        let real = quartet_site_likelihood(m, &x, topo, point);
        let enc = quartet_site_likelihood(m, &x, topo, boxed);
        assert!(enc.contains(real), "{real} not in {enc:?}");

        let thin = triplet_site_likelihood(m, &x[..3], [point[0], point[1], point[2]].map(Interval::point));
        assert!(thin.contains(triplet_site_likelihood(m, &x[..3], [point[0], point[1], point[2]])));
    }
}

fn toy_data() -> SitePatternData {
    SitePatternData::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![
            (SitePattern::parse("aaa").unwrap(), 12),
            (SitePattern::parse("aag").unwrap(), 3),
            (SitePattern::parse("tca").unwrap(), 1),
        ],
    )
    .unwrap()
}

#[test]
fn dataset_shape_is_product_of_powers() {
    let d = toy_data();
    for (class, theta) in [
        (TreeClass::UnrootedTriplet, vec![0.1, 0.05, 0.3]),
        (TreeClass::ClockedTriplet, vec![0.1, 0.2]),
        (TreeClass::ClockedTripletFossil, vec![0.1, 0.2, 0.6]),
    ] {
        for m in [SubstModel::jc(), hky()] {
            let target = dataset_log_shape(&d, class, m, DomainBounds::default()).unwrap();
            let shape = TreeShape::new(&d, m, class, None).unwrap();
            let c = target.piece(0).shape.eval_real(&theta).unwrap() / shape.eval_real(&theta).unwrap();
            let mut product = 1.0;
            for (p, count) in d.patterns() {
                let l = match class {
                    TreeClass::UnrootedTriplet => triplet_site_likelihood(&m, p.states(), [theta[0], theta[1], theta[2]]),
                    _ => {
                        let gamma = theta.get(2).copied();
                        let b = clocked_triplet_branches(theta[0], theta[0] + theta[1], gamma).unwrap();
                        clocked_triplet_site_likelihood(&m, p.states(), b)
                    }
                };
                product *= l.powi(*count as i32);
            }
            let got = shape.eval_real(&theta).unwrap();
            assert!(((got - product) / product).abs() < 1e-10, "{class}: {got} vs {product}");
            // the rescaled shape differs only by a constant factor
            let theta2: Vec<f64> = theta.iter().map(|v| v * 0.7).collect();
            let c2 = target.piece(0).shape.eval_real(&theta2).unwrap() / shape.eval_real(&theta2).unwrap();
            assert!(((c - c2) / c).abs() < 1e-10);
        }
    }
}

#[test]
fn dataset_shape_enclosures_contain_points() {
    let d = toy_data();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for class in [TreeClass::UnrootedTriplet, TreeClass::ClockedTriplet, TreeClass::ClockedTripletFossil] {
        let target = dataset_log_shape(&d, class, hky(), DomainBounds::default()).unwrap();
        let shape = &target.piece(0).shape;
        for _ in 0..500 {
            let sides: Vec<(f64, f64)> = (0..class.dim())
                .map(|k| {
                    if class == TreeClass::ClockedTripletFossil && k == 2 {
                        let a = rng.random::<f64>() * 0.9;
                        (a, a + 0.1)
                    } else {
                        let a = rng.random::<f64>() * 0.5;
                        (a, a + rng.random::<f64>() * 0.05)
                    }
                })
                .collect();
            let b = IntervalBox::from_bounds(&sides).unwrap();
            let enc = shape.eval_interval(&b).unwrap();
            let x: Vec<f64> = sides.iter().map(|(a, c)| a + rng.random::<f64>() * (c - a)).collect();
            let x: Vec<f64> = x.iter().zip(&sides).map(|(v, s)| v.clamp(s.0, s.1)).collect();
            assert!(enc.contains(shape.eval_real(&x).unwrap()));
        }
    }
}
