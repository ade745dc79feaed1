use malle_core::invariants::{close_group, cyclic_regular, direct_product, symmetric};
use malle_core::permgroup::{
    cycle_type, embed_product, index_of, product_index_coprime, product_index_general, CycleType, Permutation,
};
use malle_core::tamecomp::{disc_table, table_formula, verify_delta, verify_unin, AbelianGroupSpec, RkTable};
use malle_testkit::perms;
use num_integer::Integer;
use proptest::prelude::*;

fn ct(parts: &[u32]) -> CycleType {
    CycleType::new(parts.to_vec()).unwrap()
}

fn to_testkit(p: &Permutation) -> Vec<usize> {
    (0..p.degree()).map(|i| p.apply(i)).collect()
}

#[test]
fn index_formula_matches_embedding_for_all_small_cycle_types() {
    let mut checked = 0;
    let mut coprime = 0;
    for m in 1..=6 {
        for n in 1..=6 {
            for a in perms::partitions(m) {
                for b in perms::partitions(n) {
                    let embedded = perms::product_index(&a, &b) as u64;
                    assert_eq!(product_index_general(&ct(&a), &ct(&b)), embedded, "{a:?} x {b:?}");
                    let (oa, ob) = (ct(&a).order(), ct(&b).order());
                    if oa.gcd(&ob) == 1 {
                        assert_eq!(product_index_coprime(&ct(&a), &ct(&b)).unwrap(), embedded);
                        coprime += 1;
                    } else {
                        assert!(product_index_coprime(&ct(&a), &ct(&b)).is_err());
                    }
                    checked += 1;
                }
            }
        }
    }
    // 1+2+3+5+7+11 partitions per side
    assert_eq!(checked, 29 * 29);
    assert!(coprime > 0);
}

#[test]
fn malle_invariants_of_materialized_products() {
    let g = direct_product(&symmetric(3), &cyclic_regular(3)).unwrap();
    assert_eq!((g.degree(), g.order()), (9, 18));
    assert_eq!(g.a_invariant().unwrap(), 3);
    assert_eq!(g.b_invariant_q().unwrap(), 1);
    let g = direct_product(&symmetric(5), &cyclic_regular(7)).unwrap();
    assert_eq!((g.degree(), g.order()), (35, 840));
    assert_eq!(g.a_invariant().unwrap(), 7);
    assert_eq!(g.b_invariant_q().unwrap(), 1);
}

#[test]
fn class_structure_of_symmetric_groups() {
    for n in 1..=5u32 {
        let g = symmetric(n as usize);
        let classes = g.conjugacy_classes();
        assert_eq!(classes.len(), perms::partitions(n).len());
        assert_eq!(classes.iter().map(|c| c.size).sum::<usize>(), g.order());
        for c in &classes {
            assert_eq!(c.index, perms::index(&to_testkit(&c.representative)) as u64);
        }
    }
}

#[test]
fn tame_tables_match_closed_forms() {
    for (l, k) in [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1), (7, 2)] {
        let rows = disc_table(l, k);
        assert_eq!(rows.len(), 2 * k as usize);
        for row in rows {
            let three = row.sn_class.parts() == [3];
            assert_eq!(row.compositum_exponent, table_formula(l, k, row.r, three), "l={l} k={k} {row:?}");
            let lr = l.pow(row.r) as u32;
            let a_parts = vec![l.pow(k) as u32 / lr; lr as usize];
            assert_eq!(row.compositum_exponent, perms::product_index(row.sn_class.parts(), &a_parts) as u64);
        }
    }
}

#[test]
fn lemma_grid_passes_with_default_rk() {
    let grid: [(u32, &[&str]); 3] = [
        (3, &["3", "5", "7", "9", "15", "3x3"]),
        (4, &["5", "7", "25", "5x5"]),
        (5, &["7", "11", "49", "7x7"]),
    ];
    for (n, groups) in grid {
        let rk = RkTable::default_for(n).unwrap();
        for g in groups {
            let a: AbelianGroupSpec = g.parse().unwrap();
            assert!(verify_delta(n, &a).unwrap().passed, "delta n={n} A={g}");
            assert!(verify_unin(n, &a, &rk).unwrap().holds, "unin n={n} A={g}");
            let zeroed = verify_unin(n, &a, &RkTable::zeroed(n)).unwrap();
            assert!(!zeroed.holds && !zeroed.violations.is_empty(), "zeroed n={n} A={g}");
        }
    }
}

#[test]
fn regular_cycle_types_match_brute_force() {
    for factors in [vec![3], vec![9], vec![3, 3], vec![5, 5], vec![15]] {
        let a = AbelianGroupSpec::new(factors.clone()).unwrap();
        let mine: Vec<Vec<u32>> = a.elements().map(|c| a.regular_cycle_type(&c).parts().to_vec()).collect();
        let mut theirs = perms::regular_cycle_types(&factors);
        let mut sorted = mine.clone();
        sorted.sort();
        theirs.sort();
        assert_eq!(sorted, theirs, "{factors:?}");
    }
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn from_zero_based(p: &[usize]) -> Permutation {
    let images: Vec<u32> = p.iter().map(|&i| i as u32 + 1).collect();
    Permutation::from_images(&images).unwrap()
}

proptest! {
    #[test]
    fn product_index_bounds(a in (1usize..=7).prop_flat_map(permutation), b in (1usize..=7).prop_flat_map(permutation)) {
        let (pa, pb) = (from_zero_based(&a), from_zero_based(&b));
        let (ca, cb) = (cycle_type(&pa), cycle_type(&pb));
        let (m, n) = (a.len() as u64, b.len() as u64);
        let (ia, ib) = (index_of(&ca), index_of(&cb));
        let ind = product_index_general(&ca, &cb);
        prop_assert_eq!(ind, product_index_general(&cb, &ca));
        prop_assert_eq!(ind, perms::index(&to_testkit(&embed_product(&pa, &pb))) as u64);
        prop_assert!(ind >= (n * ia).max(m * ib));
        prop_assert!(ind <= n * ia + m * ib);
    }

    #[test]
    fn cycle_type_is_a_conjugacy_invariant(a in permutation(6), g in permutation(6)) {
        let (pa, pg) = (from_zero_based(&a), from_zero_based(&g));
        let conj = pg.inverse().compose(&pa).compose(&pg);
        prop_assert_eq!(cycle_type(&conj), cycle_type(&pa));
        prop_assert_eq!(pa.order(), cycle_type(&pa).order());
        prop_assert!(pa.pow(pa.order()).is_identity());
    }

    #[test]
    fn closure_obeys_lagrange(gens in prop::collection::vec(permutation(5), 1..=2)) {
        let gens: Vec<Permutation> = gens.iter().map(|g| from_zero_based(g)).collect();
        let g = close_group(&gens).unwrap();
        prop_assert_eq!(120 % g.order(), 0);
        for x in g.elements() {
            prop_assert_eq!(g.order() as u64 % x.order(), 0);
        }
        prop_assert_eq!(g.conjugacy_classes().iter().map(|c| c.size).sum::<usize>(), g.order());
    }
}
