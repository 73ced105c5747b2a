//! Independent recomputations of tree and B-series quantities.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{q, random_tableau, rt};
use num_traits::One;
use peprk::methods::{lookup, ButcherTableau};
use peprk::trees::{
    conjugacy_classes, density, ep_conjugate, ep_conjugate_by_rerooting, generate_trees, leaves, symmetry,
    trees_of_order,
};
use peprk::{
    classical_order, elementary_weights, exact_flow_weights, map_from_flow, modified_equation, pep_order, validate,
    Rational, RootedTree, Tableau, Tolerances,
};
use proptest::prelude::*;

/// Otter's recurrence for unlabelled rooted trees.
fn otter(n_max: usize) -> Vec<u64> {
    let mut a = vec![0u64; n_max + 1];
    a[1] = 1;
    for n in 1..n_max {
        let mut sum = 0;
        for k in 1..=n {
            let s: u64 = (1..=k).filter(|d| k % d == 0).map(|d| d as u64 * a[d]).sum();
            sum += s * a[n - k + 1];
        }
        a[n + 1] = sum / n as u64;
    }
    a
}

#[test]
fn counts_match_otter() {
    let a = otter(10);
    assert_eq!(&a[1..], [1, 1, 2, 4, 9, 20, 48, 115, 286, 719]);
    for n in 1..=10 {
        assert_eq!(trees_of_order(n).len() as u64, a[n], "order {n}");
    }
    assert_eq!(generate_trees(10).unwrap().len() as u64, a.iter().sum::<u64>());
    assert!(generate_trees(11).is_err());
}

fn children(parents: &[Option<usize>]) -> Vec<Vec<usize>> {
    let mut kids = vec![Vec::new(); parents.len()];
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            kids[*p].push(i);
        }
    }
    kids
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut x = p.clone();
            x.insert(i, n - 1);
            out.push(x);
        }
    }
    out
}

#[test]
fn symmetry_by_brute_force() {
    for n in 1..=6 {
        let perms = permutations(n);
        for t in trees_of_order(n) {
            let par = t.parents();
            let autos = perms
                .iter()
                .filter(|p| p[0] == 0 && (1..n).all(|i| par[p[i]] == par[i].map(|j| p[j])))
                .count();
            assert_eq!(symmetry(&t), autos as u64, "{t}");
        }
    }
}

fn subtree_sizes(t: &RootedTree) -> Vec<u64> {
    let par = t.parents();
    let mut size = vec![1u64; par.len()];
    for i in (1..par.len()).rev() {
        size[par[i].unwrap()] += size[i];
    }
    size
}

#[test]
fn density_and_labelling_identity() {
    for n in 1..=9 {
        let mut total = 0u64;
        let fact: u64 = (1..=n as u64).product();
        for t in trees_of_order(n) {
            assert_eq!(density(&t), subtree_sizes(&t).iter().product::<u64>(), "{t}");
            total += fact / (symmetry(&t) * density(&t));
        }
        // monotonically labelled trees: (n-1)!
        assert_eq!(total, (1..n as u64).product::<u64>(), "order {n}");
    }
}

/// Moves the root to the parent of `leaf` and hangs the leaf off the old root.
fn reroot(t: &RootedTree, leaf: usize) -> RootedTree {
    let par = t.parents();
    let n = par.len();
    let mut adj = vec![BTreeSet::new(); n];
    for (i, p) in par.iter().enumerate() {
        if let Some(p) = p {
            adj[i].insert(*p);
            adj[*p].insert(i);
        }
    }
    let p = par[leaf].unwrap();
    adj[p].remove(&leaf);
    adj[leaf].remove(&p);
    adj[0].insert(leaf);
    adj[leaf].insert(0);
    fn build(v: usize, from: usize, adj: &[BTreeSet<usize>]) -> RootedTree {
        RootedTree::graft(adj[v].iter().filter(|&&w| w != from).map(|&w| build(w, v, adj)))
    }
    build(p, usize::MAX, &adj)
}

#[test]
fn conjugates_agree_with_rerooting() {
    let mut pairs = 0;
    for t in generate_trees(7).unwrap().into_iter().filter(|t| t.order() > 1) {
        for leaf in leaves(&t) {
            let (c, sign) = ep_conjugate(&t, leaf).unwrap();
            assert_eq!(c.order(), t.order());
            assert_eq!(c, reroot(&t, leaf.node_index), "{t} leaf {}", leaf.node_index);
            assert_eq!(ep_conjugate_by_rerooting(&t, leaf).unwrap(), (c, sign));
            assert_eq!(sign, if leaf.depth % 2 == 0 { 1 } else { -1 });
            pairs += 1;
        }
    }
    assert!(pairs > 200, "{pairs}");
}

#[test]
fn bushy_and_tall_trees() {
    for n in 2..=10 {
        let bushy = RootedTree::bushy(n);
        for leaf in leaves(&bushy) {
            assert_eq!(ep_conjugate(&bushy, leaf).unwrap(), (bushy.clone(), -1));
        }
        let tall = RootedTree::tall(n);
        let l = leaves(&tall);
        assert_eq!(l.len(), 1);
        let (c, sign) = ep_conjugate(&tall, l[0]).unwrap();
        assert_eq!(c, tall);
        assert_eq!(sign == 1, n % 2 == 1, "order {n}");
    }
}

#[test]
fn classes_are_closed_under_conjugation() {
    for (order, classes) in conjugacy_classes(8).unwrap() {
        let mut class_of = BTreeMap::new();
        for (k, class) in classes.iter().enumerate() {
            for t in class {
                assert!(class_of.insert(t.clone(), k).is_none(), "{t} in two classes");
            }
        }
        assert_eq!(class_of.len(), trees_of_order(order).len());
        if order == 1 {
            continue;
        }
        // every conjugate stays in the class, and each class is connected
        for class in &classes {
            let mut reached = BTreeSet::from([class[0].clone()]);
            let mut frontier = vec![class[0].clone()];
            while let Some(t) = frontier.pop() {
                for leaf in leaves(&t) {
                    let c = ep_conjugate(&t, leaf).unwrap().0;
                    assert_eq!(class_of[&c], class_of[&t]);
                    if reached.insert(c.clone()) {
                        frontier.push(c);
                    }
                }
            }
            // conjugacy is symmetric, so walking forward reaches the whole class
            assert_eq!(reached.len(), class.len(), "{}", class[0]);
        }
    }
}

/// `Φ` computed node by node from the parent array.
fn weight_oracle(t: &ButcherTableau<Rational>, tree: &RootedTree) -> Rational {
    let s = t.stages();
    let kids = children(&tree.parents());
    fn stage(v: usize, kids: &[Vec<usize>], t: &ButcherTableau<Rational>, s: usize) -> Vec<Rational> {
        let mut out = vec![Rational::one(); s];
        for &k in &kids[v] {
            let phi = stage(k, kids, t, s);
            for (i, o) in out.iter_mut().enumerate() {
                let ai: Rational = (0..s).map(|j| t.a(i, j) * &phi[j]).sum();
                *o *= ai;
            }
        }
        out
    }
    let phi = stage(0, &kids, t, s);
    (0..s).map(|i| &t.b()[i] * &phi[i]).sum()
}

#[test]
fn weights_match_butcher_sums() {
    let Tableau::Exact(t) = lookup("PEP(4,2,5)").unwrap() else { panic!() };
    let u = elementary_weights(&t, 6).unwrap();
    for tree in generate_trees(6).unwrap() {
        assert_eq!(u.get(&tree), &weight_oracle(&t, &tree), "{tree}");
    }
    let (a, b, c) = (t.a_matrix(), t.b(), t.c());
    let s = t.stages();
    let bc2: Rational = (0..s).map(|i| &b[i] * &c[i] * &c[i]).sum();
    let bac: Rational = (0..s).flat_map(|i| (0..s).map(move |j| (i, j))).map(|(i, j)| &b[i] * &a[i][j] * &c[j]).sum();
    assert_eq!(u.get(&rt("[[][]]")), &bc2);
    assert_eq!(u.get(&rt("[[[]]]")), &bac);
    assert_eq!(bc2, q("1/3"));
}

#[test]
fn rk44_weights_are_exact_to_order_four() {
    let Tableau::Exact(t) = lookup("RK(4,4)").unwrap() else { panic!() };
    let u = elementary_weights(&t, 5).unwrap();
    let e = exact_flow_weights::<Rational>(5).unwrap();
    for tree in generate_trees(5).unwrap() {
        let exact = Rational::new(1.into(), density(&tree).into());
        assert_eq!(e.get(&tree), &exact);
        assert_eq!(u.get(&tree) == &exact, tree.order() <= 4, "{tree}");
    }
}

#[test]
fn float_registry_agrees_with_itself() {
    for t in peprk::methods::registry() {
        let r = validate(&t).unwrap();
        assert_eq!(r.matches_claim(), Some(true), "{}", t.name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_round_trip(n in 1usize..=8, k in 0usize..1000) {
        let all = trees_of_order(n);
        let t = &all[k % all.len()];
        prop_assert_eq!(&t.to_string().parse::<RootedTree>().unwrap(), t);
        let drawn = t.to_string().replace('•', "[]");
        prop_assert_eq!(&drawn.parse::<RootedTree>().unwrap(), t);
        prop_assert_eq!(&RootedTree::from_levels(t.levels()).unwrap(), t);
    }

    #[test]
    fn modified_equation_round_trips(t in random_tableau(3)) {
        let u = elementary_weights(&t, 6).unwrap();
        let v = modified_equation(&u).unwrap();
        prop_assert_eq!(v.get(&RootedTree::leaf()), u.get(&RootedTree::leaf()));
        prop_assert_eq!(map_from_flow(&v).unwrap(), u);
    }

    #[test]
    fn pep_order_dominates_classical(t in random_tableau(3)) {
        let tol = Tolerances::default();
        let u = elementary_weights(&t, 8).unwrap();
        let p = classical_order(&u, &tol);
        let q = pep_order(&t, 8, &tol).unwrap();
        prop_assert!(q >= p.min(8), "p = {p}, q = {q}");
    }

    #[test]
    fn exact_and_float_certification_agree(t in random_tableau(3)) {
        let exact = validate(&t.clone().into()).unwrap();
        let float = validate(&t.to_f64().into()).unwrap();
        prop_assert_eq!(exact.classical_order, float.classical_order);
        prop_assert_eq!(exact.pep_order, float.pep_order);
    }
}

