//! Printed condition lists and conjugate tables.

use std::collections::BTreeSet;

use peprk::bseries::reduce_weight_condition;
use peprk::linalg::rank;
use peprk::trees::{leaves, LeafRef};
use peprk::{conditions_on_weights, Condition, RootedTree};

use super::{flow, q, rt, weights};

/// Energy-preservation conditions on flow coefficients of order `n`, sorted.
pub fn flow_conditions(n: usize) -> Vec<Condition> {
    let mut v = match n {
        2 => vec![flow(2, &[("1", "[[]]")])],
        3 => vec![flow(3, &[("1", "[[],[]]")])],
        4 => vec![
            flow(4, &[("1", "[[[[]]]]")]),
            flow(4, &[("1/2", "[[[][]]]"), ("-1", "[[],[[]]]")]),
            flow(4, &[("1", "[[][][]]")]),
        ],
        5 => vec![
            flow(5, &[("1/2", "[[[[][]]]]"), ("1", "[[[[]]][]]")]),
            flow(5, &[("1", "[[[[]][]]]"), ("-1/2", "[[[]][[]]]")]),
            flow(5, &[("1", "[[[]][][]]"), ("-1/3", "[[[][][]]]")]),
            flow(5, &[("1", "[[][][][]]")]),
        ],
        6 => vec![
            flow(6, &[("1", "[[[[[[]]]]]]")]),
            flow(6, &[("1", "[[],[[[],[]]]]")]),
            flow(6, &[("1", "[[[[]],[[]]]]")]),
            flow(6, &[("1", "[[],[],[],[],[]]")]),
            flow(6, &[("1/2", "[[[[[],[]]]]]"), ("-1", "[[],[[[[]]]]]")]),
            flow(6, &[("1/6", "[[[[],[],[]]]]"), ("1/2", "[[],[],[[[]]]]")]),
            flow(6, &[("1/2", "[[[],[],[[]]]]"), ("-1/2", "[[],[[]],[[]]]")]),
            // printed with five leaves under the inner node, which has order seven
            flow(6, &[("1/24", "[[[],[],[],[]]]"), ("-1/6", "[[],[],[],[[]]]")]),
            flow(6, &[("1/6", "[[],[[],[],[]]]"), ("-1/4", "[[],[],[[],[]]]")]),
            flow(6, &[("1", "[[],[[],[[]]]]"), ("1/2", "[[[],[[],[]]]]"), ("-1/2", "[[[]],[[],[]]]")]),
            flow(6, &[("1", "[[[[],[[]]]]]"), ("-1", "[[[],[[[]]]]]"), ("1", "[[[]],[[[]]]]")]),
        ],
        _ => panic!("no printed list for order {n}"),
    };
    v.sort();
    v
}

pub fn weights_of_order(n: usize) -> Vec<Condition> {
    conditions_on_weights(n).unwrap().iter().filter(|c| c.order() == n).cloned().collect()
}

pub fn weight_conditions_three() -> Vec<Condition> {
    vec![weights(3, &[("1", &["[[][]]"]), ("-1/3", &[])])]
}

pub fn weight_conditions_four() -> Vec<Condition> {
    let mut v = vec![
        weights(4, &[("1", &["[[[[]]]]"]), ("-1", &["[[[]]]"]), ("1/8", &[])]),
        weights(4, &[("1", &["[[[]][]]"]), ("-1/2", &["[[[][]]]"]), ("-1/12", &[])]),
        weights(4, &[("1", &["[[][][]]"]), ("-1/4", &[])]),
    ];
    v.sort();
    v
}

/// As printed: the first two lines keep a fourth-order weight, the last two
/// are fully reduced.
pub fn weight_conditions_five() -> [Condition; 4] {
    [
        weights(5, &[
            ("1", &["[[[[]]][]]"]),
            ("1/2", &["[[[[][]]]]"]),
            ("-1", &["[[[[]]]]"]),
            ("-1/2", &["[[[][]]]"]),
            ("1/2", &["[[[]]]"]),
            ("-1/24", &[]),
        ]),
        weights(5, &[
            ("2", &["[[[[]][]]]"]),
            ("-1", &["[[[]][[]]]"]),
            ("-1", &["[[[[]]]]"]),
            ("-1", &["[[[][]]]"]),
            ("1", &["[[[]]]"]),
            ("-1/24", &[]),
        ]),
        weights(5, &[("1", &["[[[]][][]]"]), ("-1/3", &["[[[][][]]]"]), ("-1/12", &[])]),
        weights(5, &[("1", &["[[][][][]]"]), ("-1/5", &[])]),
    ]
}

/// The printed list reduced the same way as ours.
pub fn weight_conditions_five_reduced() -> Vec<Condition> {
    let mut v: Vec<Condition> = weight_conditions_five().iter().map(|c| reduce_weight_condition(c).unwrap()).collect();
    v.sort();
    v
}

pub type Terms = &'static [(&'static str, &'static [&'static str])];

#[rustfmt::skip]
pub const WEIGHTS_SIX: [Terms; 11] = [
    &[("-2", &[]), ("-36", &["[[[[]]][]]"]), ("-36", &["[[[[[][]]]]]"]), ("-24", &["[[[[]]]]"]), ("-3", &["[[[][]]]"]), ("6", &["[[[]][]]"]), ("18", &["[[[]]]"]), ("18", &["[[[[][]]]]"]), ("72", &["[[[[[]]]][]]"])],
    &[("1", &[]), ("-72", &["[[[[]]][]]"]), ("-36", &["[[[[][]]]]"]), ("-36", &["[[[]][][]]"]), ("-12", &["[[[]]]"]), ("-12", &["[[[][][]]]"]), ("24", &["[[[]][]]"]), ("24", &["[[[[][][]]]]"]), ("24", &["[[[][]]]"]), ("24", &["[[[[]]]]"]), ("72", &["[[[[]]][[]]]"])],
    &[("-5", &[]), ("-144", &["[[[]][[]][]]"]), ("-144", &["[[[[]][]]]"]), ("-72", &["[[[][][]]]"]), ("-24", &["[[[]]]"]), ("24", &["[[[]][]]"]), ("24", &["[[[[]]]]"]), ("60", &["[[[][]]]"]), ("72", &["[[[]][[]]]"]), ("72", &["[[[]][][]]"]), ("144", &["[[[[]][][]]]"])],
    &[("1", &[]), ("-180", &["[[[]][][]]"]), ("-30", &["[[[][][][]]]"]), ("-30", &["[[[][]]]"]), ("60", &["[[[]][]]"]), ("60", &["[[[][][]]]"]), ("120", &["[[[]][][][]]"])],
    &[("1", &[]), ("-36", &["[[[]][][]]"]), ("-24", &["[[[][][]][]]"]), ("-6", &["[[[][]]]"]), ("12", &["[[[]][]]"]), ("12", &["[[[][][]]]"]), ("36", &["[[[][]][][]]"])],
    &[("-1", &[]), ("-36", &["[[[[]]][]]"]), ("-18", &["[[[[][]]]]"]), ("-3", &["[[[][]]]"]), ("6", &["[[[]]]"]), ("6", &["[[[]][]]"]), ("12", &["[[[[]]]]"]), ("36", &["[[[[][]]][]]"])],
    &[("-5/144", &[]), ("1", &["[[[[]][[]]]]"]), ("-1", &["[[[[]][]]]"]), ("-1/2", &["[[[]][[]]]"]), ("-1/6", &["[[[]]]"]), ("1/6", &["[[[][]]]"]), ("1/6", &["[[[[]]]]"]), ("2/3", &["[[[]][]]"])],
    &[("-1/6", &[]), ("1", &["[[][][][][]]"])],
    &[("-1", &[]), ("-48", &["[[[[]]][[]]]"]), ("-48", &["[[[[[]][]]]]"]), ("-12", &["[[[][]]]"]), ("-8", &["[[[[]]]]"]), ("8", &["[[[]]]"]), ("24", &["[[[]][[]]]"]), ("24", &["[[[[][]]]]"]), ("48", &["[[[[[]]][]]]"])],
    &[("-1", &[]), ("-48", &["[[[[]][]]]"]), ("-24", &["[[[][]][][]]"]), ("-24", &["[[[][]][]]"]), ("-24", &["[[[[]]][]]"]), ("-12", &["[[[[][]]]]"]), ("-4", &["[[[]]]"]), ("12", &["[[[]][]]"]), ("16", &["[[[[]]]]"]), ("18", &["[[[][]]]"]), ("24", &["[[[]][[]]]"]), ("24", &["[[[[][]][]]]"]), ("48", &["[[[[]][]][]]"])],
    &[("1", &["[[[[]]]]"]), ("-1", &["[[[]]]", "[[[]]]"]), ("-2", &["[[[[[]]]]]"]), ("2", &["[[[[[[]]]]]]"])],
];

/// Line index, printed tree, corrected tree. Line 2 has u[[•],[[•]]] where
/// the derivation (and every published q = 6 tableau) needs u[•,•,[[•]]];
/// line 10 has u[•,•,[•,•]] for u[[•],[•,•]].
pub const WEIGHTS_SIX_TYPOS: [(usize, &str, &[&str]); 2] =
    [(1, "[[[[]]][[]]]", &["[[][][[[]]]]"]), (9, "[[[][]][][]]", &["[[[]][[][]]]"])];

/// Printed line `i` with the typo corrected, if it has one.
pub fn weight_condition_six(i: usize, corrected: bool) -> Condition {
    let mut terms = WEIGHTS_SIX[i].to_vec();
    if corrected {
        for (line, printed, tree) in WEIGHTS_SIX_TYPOS {
            if line == i {
                for term in &mut terms {
                    if term.1 == [printed] {
                        term.1 = tree;
                    }
                }
            }
        }
    }
    weights(6, &terms)
}

pub fn span_rank(cs: &[Condition]) -> usize {
    let polys: Vec<_> = cs.iter().map(Condition::to_poly).collect();
    let monomials: BTreeSet<_> = polys.iter().flat_map(|p| p.terms().keys().cloned()).collect();
    let rows: Vec<Vec<_>> = polys
        .iter()
        .map(|p| monomials.iter().map(|m| p.terms().get(m).cloned().unwrap_or_else(|| q("0"))).collect())
        .collect();
    rank(&rows, monomials.len())
}

pub fn in_span(basis: &[Condition], c: &Condition) -> bool {
    span_rank(&[basis, std::slice::from_ref(c)].concat()) == span_rank(basis)
}

/// The unique leaf satisfying `pred(leaf, number of children of its parent)`.
pub fn leaf_where(t: &RootedTree, pred: impl Fn(&LeafRef, usize) -> bool) -> LeafRef {
    let parents = t.parents();
    let children = |p: usize| parents.iter().filter(|x| **x == Some(p)).count();
    let hits: Vec<LeafRef> = leaves(t)
        .into_iter()
        .filter(|l| pred(l, children(parents[l.node_index].unwrap())))
        .collect();
    assert_eq!(hits.len(), 1, "{t}");
    hits[0]
}

pub struct ConjugateRow {
    pub table: usize,
    pub tree: RootedTree,
    pub leaf: LeafRef,
    pub conjugate: RootedTree,
    pub sign: i8,
}

/// Every row of the three conjugate tables. In the third table the printed
/// blue entry has seven nodes and the printed green entry is the blue
/// conjugate; those two rows hold the values both constructions give.
pub fn conjugate_rows() -> Vec<ConjugateRow> {
    let mut rows = Vec::new();
    let mut push = |table, tree: &RootedTree, leaf, conjugate: &str, sign| {
        rows.push(ConjugateRow { table, tree: tree.clone(), leaf, conjugate: rt(conjugate), sign })
    };

    let t = rt("[[],[[],[[]]]]");
    for (m, expected, sign) in [(1, "[[],[[],[[]]]]", -1), (2, "[[[]],[[],[]]]", 1), (3, "[[[],[[],[]]]]", -1)] {
        push(1, &t, leaf_where(&t, |l, _| l.depth == m), expected, sign);
    }

    let t = rt("[[][][[]]]");
    for leaf in leaves(&t).into_iter().filter(|l| l.depth == 1) {
        push(2, &t, leaf, "[[][][[]]]", -1);
    }
    push(2, &t, leaf_where(&t, |l, _| l.depth == 2), "[[[][][]]]", 1);

    let t = rt("[[][[]][[[]][]]]");
    push(3, &t, leaf_where(&t, |l, s| l.depth == 2 && s == 2), "[[[]][[[]][][]]]", 1);
    push(3, &t, leaf_where(&t, |l, _| l.depth == 3), "[[[][[[]][][]]]]", -1);
    push(3, &t, leaf_where(&t, |l, s| l.depth == 2 && s == 1), "[[[][][[][[]]]]]", 1);
    push(3, &t, leaf_where(&t, |l, _| l.depth == 1), "[[][[]][[[]][]]]", -1);
    rows
}
