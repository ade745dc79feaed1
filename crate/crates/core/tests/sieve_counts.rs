use malle_core::arith::primes_up_to;
use malle_core::sieve::{
    count_brute, count_points_mod_q, count_residue, random_shears, scaling_experiment, sheared_experiment,
    solution_count_crt, solution_count_direct, AffineScheme, BoxSpec, ExperimentConfig, Method, SieveConfig,
    SieveError, Term,
};
use malle_testkit::lattice::{count_points, count_solutions_mod, Poly};
use num_rational::Rational64;
use num_traits::Signed;
use proptest::prelude::*;

fn r(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn oracle_polys(s: &AffineScheme) -> Vec<Poly> {
    s.polynomials.iter().map(|p| p.iter().map(|Term(c, e)| (*c, e.clone())).collect()).collect()
}

/// Lattice points of `m·diag(r)·[−1,1]^n` on the scheme mod q, by scanning an
/// enclosing box and undoing the shear by forward substitution.
fn oracle_count(s: &AffineScheme, scale: &[Rational64], shear: &[Vec<Rational64>], q: u64) -> u64 {
    let n = scale.len();
    let bounds: Vec<(i64, i64)> = (0..n)
        .map(|i| {
            let reach: Rational64 = (0..n).map(|j| shear[i][j].abs() * scale[j]).sum();
            let b = reach.floor().to_integer();
            (-b, b)
        })
        .collect();
    let inside = |a: &[i64]| {
        let mut y: Vec<Rational64> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = r(a[i]);
            for (j, yj) in y.iter().enumerate() {
                v -= shear[i][j] * yj;
            }
            if v.abs() > scale[i] {
                return false;
            }
            y.push(v);
        }
        true
    };
    count_points(&oracle_polys(s), &bounds, q, inside)
}

fn linear_closed_form(n: usize, zero: &[usize], scale: &[Rational64], q: u64) -> u64 {
    (0..n)
        .map(|i| {
            let ri = scale[i].floor().to_integer() as u64;
            if zero.contains(&i) {
                2 * (scale[i] / r(q as i64)).floor().to_integer() as u64 + 1
            } else {
                2 * ri + 1
            }
        })
        .product()
}

#[test]
fn scheme_files_parse() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/schemes/");
    let read = |f: &str| AffineScheme::from_json(&std::fs::read_to_string(format!("{root}{f}")).unwrap()).unwrap();
    assert_eq!(read("disc_cubic.json"), AffineScheme::binary_cubic_discriminant());
    assert_eq!(read("line_a2.json"), AffineScheme::coordinate_subspace(2, &[0]).unwrap());
    assert_eq!(read("line_a3.json"), AffineScheme::coordinate_subspace(3, &[0, 1]).unwrap());
    assert_eq!(read("line_a4.json"), AffineScheme::coordinate_subspace(4, &[0, 1, 2]).unwrap());
    assert_eq!(read("quadric_cone.json").codim, 1);
}

#[test]
fn brute_force_matches_oracle() {
    let cfg = SieveConfig::default();
    let disc = AffineScheme::binary_cubic_discriminant();
    let cone = AffineScheme::from_json(r#"{"n_vars":3,"codim":1,"polynomials":[[[1,[0,2,0]],[-1,[1,0,1]]]]}"#).unwrap();
    let id4 = BoxSpec::cube(4, r(4)).unwrap();
    for q in [1, 2, 3, 5, 6, 7, 15, 30] {
        let want = oracle_count(&disc, &id4.scale, &id4.shear, q);
        assert_eq!(count_brute(&disc, &id4, q, &cfg).unwrap(), want, "q = {q}");
        assert_eq!(count_residue(&disc, &id4, q, &cfg).unwrap(), want, "q = {q}");
    }
    let m = vec![
        vec![r(1), r(0), r(0)],
        vec![Rational64::new(1, 2), r(1), r(0)],
        vec![r(-2), Rational64::new(3, 2), r(1)],
    ];
    let scale = vec![r(6), Rational64::new(9, 2), r(5)];
    let bx = BoxSpec::scaled(scale.clone()).unwrap().with_shear(m.clone()).unwrap();
    for q in [2, 5, 7, 10, 21] {
        let want = oracle_count(&cone, &scale, &m, q);
        assert_eq!(count_brute(&cone, &bx, q, &cfg).unwrap(), want, "q = {q}");
        assert_eq!(count_residue(&cone, &bx, q, &cfg).unwrap(), want, "q = {q}");
    }
}

#[test]
fn dual_paths_agree_on_the_discriminant_locus() {
    let cfg = SieveConfig::default();
    let disc = AffineScheme::binary_cubic_discriminant();
    let ecfg = ExperimentConfig { seed: 7, ..ExperimentConfig::default() };
    let shears = random_shears(4, 3, &ecfg).unwrap();
    for scale in [vec![r(12); 4], vec![r(20), r(15), r(6), r(3)]] {
        for m in &shears {
            let bx = BoxSpec::scaled(scale.clone()).unwrap().with_shear(m.clone()).unwrap();
            for q in [2, 7, 11, 35] {
                assert_eq!(
                    count_brute(&disc, &bx, q, &cfg).unwrap(),
                    count_residue(&disc, &bx, q, &cfg).unwrap(),
                    "scale {scale:?}, q = {q}"
                );
            }
        }
    }
    // the dispatcher switches paths at the brute-force cap
    let small = BoxSpec::cube(4, r(10)).unwrap();
    let big = BoxSpec::cube(4, r(60)).unwrap();
    assert_eq!(count_points_mod_q(&disc, &small, 5, &cfg).unwrap().1, Method::Brute);
    assert_eq!(count_points_mod_q(&disc, &big, 5, &cfg).unwrap().1, Method::ResidueClass);
}

#[test]
fn solution_counts_are_multiplicative() {
    let cfg = SieveConfig::default();
    let disc = AffineScheme::binary_cubic_discriminant();
    let polys = oracle_polys(&disc);
    for (q1, q2) in [(2, 3), (3, 5), (2, 7), (5, 7), (6, 5)] {
        let q = q1 * q2;
        let direct = solution_count_direct(&disc, q, &cfg).unwrap();
        assert_eq!(direct, count_solutions_mod(&polys, 4, q));
        assert_eq!(direct, solution_count_crt(&disc, q1, &cfg).unwrap() * solution_count_crt(&disc, q2, &cfg).unwrap());
        assert_eq!(direct, solution_count_crt(&disc, q, &cfg).unwrap());
    }
}

#[test]
fn linear_counts_fall_with_q() {
    let cfg = SieveConfig::default();
    let plane = AffineScheme::coordinate_subspace(3, &[1]).unwrap();
    let bx = BoxSpec::cube(3, r(40)).unwrap();
    let counts: Vec<u64> = primes_up_to(60).iter().map(|&q| count_residue(&plane, &bx, q, &cfg).unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn scaling_fits_recover_codimension() {
    let cfg = ExperimentConfig::default();
    let qs = primes_up_to(50);
    let rs = vec![r(10), r(100), r(1000)];
    for (n, zero) in [(2, vec![0]), (3, vec![0, 1]), (4, vec![0, 1, 2])] {
        let s = AffineScheme::coordinate_subspace(n, &zero).unwrap();
        let rep = scaling_experiment(&s, &rs, &qs, &cfg).unwrap();
        let k = zero.len() as f64;
        assert!((rep.q_exponent.unwrap() + k).abs() <= 0.1, "codim {k}: {:?}", rep.q_exponent);
        for c in &rep.cells {
            assert_eq!(c.count, linear_closed_form(n, &zero, &vec![r(c.r[0] as i64); n], c.q));
        }
        assert!(rep.multiplicativity.iter().all(|m| m.residual.unwrap_or(0) == 0));
    }
    let disc = AffineScheme::binary_cubic_discriminant();
    let rep = scaling_experiment(&disc, &rs, &qs, &cfg).unwrap();
    let e = rep.q_exponent.unwrap();
    assert!((-1.3..=-0.8).contains(&e), "{e}");
    assert!((rep.r_exponent.unwrap() - 4.0).abs() < 0.1);
    assert!(rep.within_envelope);
}

#[test]
fn small_scale_regime() {
    // r ≪ q: only the zero section of the constrained coordinates survives
    let cfg = ExperimentConfig::default();
    let s = AffineScheme::coordinate_subspace(2, &[0]).unwrap();
    let rs = vec![r(10), r(30), r(100)];
    let qs = vec![1, 2, 401];
    let rep = scaling_experiment(&s, &rs, &qs, &cfg).unwrap();
    let slope = rep.r_exponent_small.unwrap();
    assert!((slope - 1.0).abs() < 0.05, "{slope}");
}

#[test]
fn sheared_counts_stay_in_envelope() {
    let cfg = ExperimentConfig { seed: 11, ..ExperimentConfig::default() };
    let disc = AffineScheme::binary_cubic_discriminant();
    let rv = vec![vec![r(24), r(16), r(8), r(8)], vec![r(30), r(30), r(4), r(4)]];
    let qs = [2, 3, 5, 7, 13, 23, 30];
    let rep = sheared_experiment(&disc, &rv, 3, &qs, &cfg).unwrap();
    assert!(rep.within_envelope, "max normalized {}", rep.max_normalized);
    // sample 0 is the identity and matches the plain count
    for c in rep.cells.iter().filter(|c| c.shear == 0) {
        let scale: Vec<Rational64> = c.r.iter().map(|&v| r(v as i64)).collect();
        let bx = BoxSpec::scaled(scale).unwrap();
        assert_eq!(c.count, count_points_mod_q(&disc, &bx, c.q, &cfg.sieve).unwrap().0);
    }
    let again = sheared_experiment(&disc, &rv, 3, &qs, &cfg).unwrap();
    let counts = |rep: &malle_core::sieve::ExperimentReport| rep.cells.iter().map(|c| c.count).collect::<Vec<_>>();
    assert_eq!(counts(&rep), counts(&again));
}

#[test]
fn anisotropic_closed_form() {
    let cfg = SieveConfig::default();
    let line = AffineScheme::coordinate_subspace(2, &[0]).unwrap();
    let bx = BoxSpec::scaled(vec![r(100), r(10)]).unwrap();
    assert_eq!(count_points_mod_q(&line, &bx, 30, &cfg).unwrap().0, 7 * 21);
}

#[test]
fn grid_guards() {
    let cfg = ExperimentConfig::default();
    let s = AffineScheme::coordinate_subspace(2, &[0]).unwrap();
    assert!(matches!(
        scaling_experiment(&s, &[r(10), r(50)], &[2, 3, 29], &cfg),
        Err(SieveError::InsufficientGrid(_))
    ));
    assert!(matches!(
        scaling_experiment(&s, &[r(10), r(100)], &[2, 3, 5], &cfg),
        Err(SieveError::InsufficientGrid(_))
    ));
    assert_eq!(
        scaling_experiment(&s, &[r(10), r(100)], &[2, 4, 29], &cfg).unwrap_err(),
        SieveError::NotSquarefree(4)
    );
}

fn squarefree(q: u64) -> bool {
    (2..=q).take_while(|p| p * p <= q).all(|p| q % (p * p) != 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linear_schemes_match_closed_form(
        n in 1usize..=4,
        mask in 1u8..16,
        scale in prop::collection::vec((1i64..=40, 1i64..=3), 4),
        q in 1u64..=60,
    ) {
        prop_assume!(squarefree(q));
        let zero: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!zero.is_empty());
        let scale: Vec<Rational64> = scale[..n].iter().map(|&(a, b)| Rational64::new(a * b, b).max(r(1))).collect();
        let s = AffineScheme::coordinate_subspace(n, &zero).unwrap();
        let bx = BoxSpec::scaled(scale.clone()).unwrap();
        let want = linear_closed_form(n, &zero, &scale, q);
        prop_assert_eq!(count_residue(&s, &bx, q, &SieveConfig::default()).unwrap(), want);
    }

    #[test]
    fn sheared_paths_agree(
        entries in prop::collection::vec((-6i64..=6, 1i64..=2), 3),
        scale in prop::collection::vec(1i64..=9, 3),
        q in prop::sample::select(vec![2u64, 3, 5, 6, 7, 10, 11]),
    ) {
        let cone = AffineScheme::from_json(r#"{"n_vars":3,"codim":1,"polynomials":[[[1,[0,2,0]],[-1,[1,0,1]]]]}"#).unwrap();
        let e = |i: usize| Rational64::new(entries[i].0, entries[i].1);
        let m = vec![vec![r(1), r(0), r(0)], vec![e(0), r(1), r(0)], vec![e(1), e(2), r(1)]];
        let scale: Vec<Rational64> = scale.into_iter().map(r).collect();
        let bx = BoxSpec::scaled(scale.clone()).unwrap().with_shear(m.clone()).unwrap();
        let cfg = SieveConfig::default();
        let brute = count_brute(&cone, &bx, q, &cfg).unwrap();
        prop_assert_eq!(brute, count_residue(&cone, &bx, q, &cfg).unwrap());
        prop_assert_eq!(brute, oracle_count(&cone, &scale, &m, q));
    }
}
