mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rigidlab::commsim::{self, BiasLedger, ProtocolMessage};
use rigidlab::gf2::{self, BitMatrix, BitVector, Subspace};
use rigidlab::querysets;
use rigidlab::rational::{self, Rational};
use rigidlab::rigidity;
use rigidlab::sysds::{self, SystematicLinearDS};
use rigidlab::{Caps, QuerySet};

fn caps() -> Caps {
    Caps::default()
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
    prop::collection::vec(any::<u64>(), rows).prop_map(move |words| {
        let rows = words
            .into_iter()
            .map(|w| BitVector::from_u64(cols, w & mask(cols)))
            .collect();
        BitMatrix::from_rows(cols, rows).unwrap()
    })
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `(n, generators)` with all generators in F_2^n.
fn subspace_input(max_n: usize) -> impl Strategy<Value = (usize, Vec<u64>)> {
    (1..=max_n).prop_flat_map(|n| (Just(n), prop::collection::vec(0..1u64 << n, 0..=n)))
}

fn subspace(n: usize, gens: &[u64]) -> Subspace {
    let vs: Vec<BitVector> = gens.iter().map(|&g| BitVector::from_u64(n, g)).collect();
    Subspace::span(n, vs.iter()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rref_is_idempotent(m in (1usize..12, 1usize..=64).prop_flat_map(|(r, c)| matrix(r, c))) {
        let once = m.rref();
        prop_assert_eq!(once.rref(), once.clone());
        prop_assert_eq!(once.rank(), m.rank());
    }

    #[test]
    fn rank_is_transpose_invariant(m in (1usize..12, 1usize..12).prop_flat_map(|(r, c)| matrix(r, c))) {
        prop_assert_eq!(m.rank(), m.transpose().rank());
        let rows: Vec<u64> = m.rows().iter().map(common::bits).collect();
        prop_assert_eq!(m.rank(), common::rank(&rows));
    }

    #[test]
    fn rank_factorization_reproduces(m in (1usize..10, 1usize..10).prop_flat_map(|(r, c)| matrix(r, c))) {
        let (a, b) = m.rank_factorize();
        prop_assert_eq!(a.ncols(), m.rank());
        prop_assert_eq!(b.nrows(), m.rank());
        if m.rank() > 0 {
            prop_assert_eq!(a.mul(&b).unwrap(), m);
        } else {
            prop_assert!(m.is_zero());
        }
    }

    #[test]
    fn vec_mat_roundtrip(root in 1usize..8, seed in any::<u64>()) {
        let code = seed & mask(root * root);
        let m = BitMatrix::from_u64_square(root, code);
        let v = gf2::vec(&m);
        prop_assert_eq!(v.len(), root * root);
        prop_assert_eq!(gf2::mat(&v).unwrap(), m.clone());
        for i in 0..root {
            for j in 0..root {
                prop_assert_eq!(v.get(i * root + j), m.get(i, j));
            }
        }
    }

    #[test]
    fn distance_matches_oracle((n, gens) in subspace_input(8), q in any::<u64>()) {
        let u = subspace(n, &gens);
        let q = q & mask(n);
        let d = u.distance(&BitVector::from_u64(n, q), &caps()).unwrap();
        prop_assert_eq!(d as u32, common::distance(q, &common::span(&gens)));
        let near = u.nearest(&BitVector::from_u64(n, q), &caps()).unwrap();
        prop_assert!(u.contains(&near.point));
        prop_assert_eq!(near.point.hamming_distance(&BitVector::from_u64(n, q)), d);
    }

    #[test]
    fn distance_shrinks_under_inclusion((n, gens) in subspace_input(8), extra in any::<u64>(), q in any::<u64>()) {
        let u = subspace(n, &gens);
        let w = u.extend([&BitVector::from_u64(n, extra & mask(n))]).unwrap();
        prop_assert!(u.is_subspace_of(&w));
        let q = BitVector::from_u64(n, q & mask(n));
        prop_assert!(w.distance(&q, &caps()).unwrap() <= u.distance(&q, &caps()).unwrap());
    }

    #[test]
    fn distance_is_subadditive((n, gens) in subspace_input(10), a in any::<u64>(), b in any::<u64>()) {
        let u = subspace(n, &gens);
        let (a, b) = (BitVector::from_u64(n, a & mask(n)), BitVector::from_u64(n, b & mask(n)));
        let d = |v: &BitVector| u.distance(v, &caps()).unwrap();
        prop_assert!(d(&(&a ^ &b)) <= d(&a) + d(&b));
    }

    #[test]
    fn rigidity_is_monotone_in_r(n in 2usize..6, m in 1usize..6, seed in any::<u64>()) {
        let q = querysets::gen_random(n, m.min((1 << n) - 1), seed).unwrap();
        let values: Vec<usize> = (0..=n).map(|r| rigidity::rigidity_value(&q, r, &caps()).unwrap().value).collect();
        prop_assert_eq!(values[0], q.max_weight());
        prop_assert_eq!(values[n], 0);
        prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        for (r, &value) in values.iter().enumerate() {
            let at_most = rigidity::rigidity_value_at_most(&q, r, &caps()).unwrap().value;
            prop_assert_eq!(at_most, value);
            let strong = rigidity::strong_rigidity_value(&q, r, &caps()).unwrap().value;
            prop_assert!(strong <= Rational::from_integer((value as i64).into()));
        }
    }

    #[test]
    fn rigidity_witness_is_consistent(n in 2usize..6, m in 1usize..6, r in 0usize..4, seed in any::<u64>()) {
        let q = querysets::gen_random(n, m.min((1 << n) - 1), seed).unwrap();
        let r = r.min(n);
        let rep = rigidity::rigidity_value(&q, r, &caps()).unwrap();
        prop_assert_eq!(rep.witness.dim(), r);
        prop_assert_eq!(rep.witness.distance(&rep.argmax_query, &caps()).unwrap(), rep.value);
        for v in &q {
            prop_assert!(rep.witness.distance(v, &caps()).unwrap() <= rep.value);
        }
    }

    #[test]
    fn solve_linear_is_correct(a in (1usize..10, 1usize..10).prop_flat_map(|(r, c)| matrix(r, c)), b in any::<u64>()) {
        let b = BitVector::from_u64(a.nrows(), b & mask(a.nrows()));
        match gf2::solve_linear(&a, &b).unwrap() {
            Some(x) => prop_assert_eq!(a.mul_vec(&x), b),
            None => {
                // b is outside the column space: appending it raises the rank
                let mut cols: Vec<BitVector> = (0..a.ncols()).map(|j| a.column(j)).collect();
                let before = BitMatrix::from_rows(a.nrows(), cols.clone()).unwrap().rank();
                cols.push(b);
                prop_assert_eq!(BitMatrix::from_rows(a.nrows(), cols).unwrap().rank(), before + 1);
            }
        }
    }

    #[test]
    fn subset_rank_roundtrip(cells in prop::collection::btree_set(0usize..128, 0..8)) {
        let cells: Vec<usize> = cells.into_iter().collect();
        let rank = commsim::subset_rank(&cells).unwrap();
        prop_assert_eq!(commsim::subset_unrank(rank, cells.len()).unwrap(), cells.clone());
        let top = cells.last().map_or(0, |&c| c + 1);
        prop_assert!(rank < commsim::binomial(top.max(cells.len()) as u64, cells.len() as u64).unwrap().max(1));
    }

    #[test]
    fn message_wire_roundtrip(s in 1usize..40, w in 1usize..33, b in any::<bool>(), seed in any::<u64>()) {
        use rand::{Rng, seq::index};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.gen_range(0..=s);
        let mut cells = index::sample(&mut rng, s, size).into_vec();
        cells.sort_unstable();
        let contents: Vec<u64> = (0..size).map(|_| rng.gen::<u64>() & mask(w)).collect();
        let (exact, _) = commsim::message_bits(s, w, size).unwrap();
        let msg = ProtocolMessage {
            b,
            location_code: commsim::subset_rank(&cells).unwrap(),
            cells,
            contents,
            total_bits: exact,
        };
        let bits = msg.to_bits(s, w).unwrap();
        prop_assert_eq!(bits.len() as u64, exact);
        prop_assert_eq!(ProtocolMessage::from_bits(&bits, s, w, size).unwrap(), msg);
    }

    #[test]
    fn direct_sum_beats_convexity(num in prop::collection::vec(0i64..=16, 1..20), k in 1u32..6) {
        let per_m: Vec<Rational> = num.iter().map(|&x| rational::ratio(x, 16)).collect();
        let ledger = BiasLedger::from_advantages(2, per_m).unwrap();
        let ds = commsim::direct_sum_success(&ledger, k).unwrap();
        prop_assert!(ds.success >= ds.convexity_floor);
        prop_assert!(ds.success <= rational::one());
        prop_assert!(ds.convexity_floor >= rational::ratio(1, 2));
    }

    #[test]
    fn queryset_text_roundtrip(n in 1usize..40, m in 1usize..20, seed in any::<u64>()) {
        let m = if n < 6 { m.min((1 << n) - 1) } else { m };
        let q = querysets::gen_random(n, m, seed).unwrap();
        let back = QuerySet::from_text(&q.to_text()).unwrap();
        prop_assert_eq!(back.n(), q.n());
        prop_assert_eq!(back.vectors(), q.vectors());
    }

    #[test]
    fn systematic_json_roundtrip(n in 2usize..7, m in 1usize..6, r in 0usize..3, seed in any::<u64>()) {
        let q = querysets::gen_random(n, m.min((1 << n) - 1), seed).unwrap();
        let rep = rigidity::rigidity_value(&q, r.min(n), &caps()).unwrap();
        let ds = sysds::build_plan(&q, &rep.witness, &caps()).unwrap();
        let text = ds.to_json().unwrap();
        let back = SystematicLinearDS::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json().unwrap(), text);
        prop_assert_eq!(back.time(), ds.time());
    }

    #[test]
    fn folding_block_bound(n in 2usize..7, m in 1usize..6, r in 1usize..4, seed in any::<u64>()) {
        prop_assume!(2 * r <= n);
        let s = querysets::gen_random(n, m.min((1 << n) - 1), seed).unwrap();
        let folded = rigidity::fold_set(&s, r).unwrap();
        let blocks = n.div_ceil(2 * r);
        prop_assert!(folded.len() <= s.len() * blocks);
        for d in 0..=(2 * r).min(n / blocks) {
            let lhs = rigidity::rigidity_value(&s, d * blocks, &caps()).unwrap().value;
            let rhs = rigidity::rigidity_value(&folded, d, &caps()).unwrap().value;
            prop_assert!(lhs <= blocks * rhs);
        }
    }
}

#[test]
fn enumeration_count_matches_gaussian_binomial() {
    for n in 0..=7 {
        for r in 0..=n {
            let all: Vec<Subspace> = gf2::enumerate_subspaces(n, r, &caps()).unwrap().collect();
            assert_eq!(all.len() as u128, gf2::gaussian_binomial(n, r), "n={n} r={r}");
            let distinct: std::collections::BTreeSet<String> = all.iter().map(|u| u.to_string()).collect();
            assert_eq!(distinct.len(), all.len());
            assert!(all.iter().all(|u| u.dim() == r));
        }
    }
}

/// `log C(l,k) <= k log(el/k)` holds for all `1 <= k <= l <= 64`. The tail
/// estimate `sum_{i<=k} C(l,i) <= 2^{l/4}` for `k <= l/16` does not: the sum
/// grows like `2^{H(1/16) l}` with `H(1/16) > 0.33`. Its exact failure set up
/// to 64 is pinned below, and the entropy bound `2^{H(k/l) l}` is checked.
#[test]
fn binomial_estimates() {
    let ln_binom = |l: u64, k: u64| {
        (0..k)
            .map(|i| ((l - i) as f64).ln() - ((i + 1) as f64).ln())
            .sum::<f64>()
    };
    let entropy = |p: f64| {
        if p <= 0.0 {
            0.0
        } else {
            -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
        }
    };
    let mut tail_failures = Vec::new();
    for l in 0..=64u64 {
        for k in 1..=l {
            let bound = k as f64 * (std::f64::consts::E * l as f64 / k as f64).ln();
            assert!(ln_binom(l, k) <= bound + 1e-9, "l={l} k={k}");
        }
        for k in 0..=l / 2 {
            let sum: u128 = (0..=k).map(|i| commsim::binomial(l, i).unwrap()).sum();
            let log_sum = (sum as f64).log2();
            assert!(
                log_sum <= entropy(k as f64 / l.max(1) as f64) * l as f64 + 1e-9,
                "l={l} k={k}"
            );
            if k <= l / 16 && log_sum > l as f64 / 4.0 {
                tail_failures.push((l, k));
            }
        }
    }
    let mut expected = vec![(16, 1), (64, 4)];
    expected.extend((32..=38).map(|l| (l, 2)));
    expected.extend((48..=60).map(|l| (l, 3)));
    expected.sort();
    assert_eq!(tail_failures, expected);
}

#[test]
fn message_bits_within_bound() {
    for s in 1..=64 {
        for w in 1..=64 {
            for size in 1..=s {
                let (exact, bound) = commsim::message_bits(s, w, size).unwrap();
                assert!(exact as f64 <= bound, "s={s} w={w} size={size}: {exact} > {bound}");
            }
        }
    }
}

#[test]
fn folding_bound_counterexample() {
    let s = QuerySet::from_text("100\n001\n").unwrap();
    assert_eq!(rigidity::rigidity_value(&s, 1, &caps()).unwrap().value, 1);
    let folded = rigidity::fold_set(&s, 1).unwrap();
    let mut rows: Vec<String> = folded.iter().map(|v| v.to_string()).collect();
    rows.sort();
    assert_eq!(rows, ["00", "10"]);
    assert_eq!(rigidity::rigidity_value(&folded, 1, &caps()).unwrap().value, 0);
}

#[test]
fn fold_examples() {
    let fold = |text: &str, r| {
        let f = rigidity::fold_set(&QuerySet::from_text(text).unwrap(), r).unwrap();
        f.iter().map(|v| v.to_string()).collect::<Vec<_>>()
    };
    assert_eq!(fold("1011\n", 1), ["10", "11"]);
    assert_eq!(fold("10111\n", 1), ["10", "11"]);
    assert_eq!(fold("0000\n", 2), ["0000"]);
}
