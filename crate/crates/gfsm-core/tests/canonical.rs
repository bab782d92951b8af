use gfsm_core::{canonicalize, GlobalState, OrderedState, ProtocolModel, SymbolicPattern};
use proptest::prelude::*;

fn toy_model() -> ProtocolModel {
    // Three-symbol model, just enough structure for state and pattern tests.
    let json = r#"{
  "states": [
    {"name": "A", "role": "upstream", "initial": true},
    {"name": "B", "role": "downstream", "initial": false},
    {"name": "C", "role": "downstream", "initial": true}
  ],
  "stimuli": [
    {"name": "Go", "kind": "orig"}
  ],
  "rules": [
    {"stimulus": "Go", "pre": ["Ext"], "post": ["(C->B)@orig"]}
  ],
  "correctness": ["X^*"]
}"#;
    ProtocolModel::from_json("toy", json).unwrap()
}

#[test]
fn canonicalize_merges_permuted_assignments() {
    let m = toy_model();
    let a = OrderedState::new(vec![1, 0]);
    let b = OrderedState::new(vec![0, 1]);
    assert_eq!(canonicalize(&m, &a), canonicalize(&m, &b));
    assert_eq!(canonicalize(&m, &a).counts(), &[1, 1, 0]);
}

#[test]
fn canonicalize_empty_state() {
    let m = toy_model();
    let g = OrderedState::new(vec![]);
    assert_eq!(canonicalize(&m, &g).routers(), 0);
}

proptest! {
    // Every permutation of a 6-router assignment maps to one canonical form,
    // and canonicalization is idempotent through the representative.
    #[test]
    fn permutation_invariant(mut syms in proptest::collection::vec(0usize..3, 6)) {
        let m = toy_model();
        let canon = canonicalize(&m, &OrderedState::new(syms.clone()));
        // exhaust all 6! orderings via repeated next_permutation-style shuffles
        syms.sort_unstable();
        let mut perms = vec![syms.clone()];
        while next_permutation(&mut syms) {
            perms.push(syms.clone());
        }
        for p in perms {
            prop_assert_eq!(canonicalize(&m, &OrderedState::new(p)), canon.clone());
        }
        let rep = OrderedState::representative(&canon);
        prop_assert_eq!(canonicalize(&m, &rep), canon);
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

// Independent oracle: assign each router to a term by brute force and check
// every term's cardinality constraint.
fn oracle_match(m: &ProtocolModel, g: &GlobalState, p: &SymbolicPattern) -> bool {
    let routers: Vec<usize> = {
        let mut v = Vec::new();
        for s in g.present() {
            for _ in 0..g.count(s) {
                v.push(s);
            }
        }
        v
    };
    fn rec(
        routers: &[usize],
        idx: usize,
        p: &SymbolicPattern,
        totals: &mut Vec<u16>,
    ) -> bool {
        if idx == routers.len() {
            return p.terms.iter().zip(totals.iter()).all(|(t, &tot)| match t.rep {
                gfsm_core::Repetition::Exactly(k) => tot == k,
                gfsm_core::Repetition::AtLeast(k) => tot >= k,
                gfsm_core::Repetition::Star => true,
            });
        }
        for (ti, term) in p.terms.iter().enumerate() {
            if term.class.contains(&routers[idx]) {
                totals[ti] += 1;
                if rec(routers, idx + 1, p, totals) {
                    totals[ti] -= 1;
                    return true;
                }
                totals[ti] -= 1;
            }
        }
        false
    }
    let mut totals = vec![0u16; p.terms.len()];
    rec(&routers, 0, p, &mut totals)
}

#[test]
fn pattern_match_agrees_with_partition_oracle() {
    let m = toy_model();
    let patterns = [
        "A^1,B^1+,C^*",
        "C^*",
        "X-{A}^*",
        "A^2+,X^*",
        "B^0,X-{B}^*",
        "A^1,X-{A,B}^*",
    ];
    // every multiset of size <= 4 over three symbols
    for a in 0..=4u16 {
        for b in 0..=4u16 {
            for c in 0..=4u16 {
                if a + b + c > 4 {
                    continue;
                }
                let g = GlobalState::from_counts(vec![a, b, c]);
                for pat in &patterns {
                    let p = SymbolicPattern::parse(&m, pat).unwrap();
                    assert_eq!(
                        gfsm_core::pattern::match_pattern(&m, &g, &p).unwrap(),
                        oracle_match(&m, &g, &p),
                        "state {:?} pattern {}",
                        g.counts(),
                        pat
                    );
                }
            }
        }
    }
}

#[test]
fn pattern_star_absorbs_everything_in_class() {
    let m = toy_model();
    let p = SymbolicPattern::parse(&m, "C^*").unwrap();
    let yes = GlobalState::from_counts(vec![0, 0, 3]);
    let no = GlobalState::from_counts(vec![0, 1, 2]);
    assert!(gfsm_core::pattern::match_pattern(&m, &yes, &p).unwrap());
    assert!(!gfsm_core::pattern::match_pattern(&m, &no, &p).unwrap());
}

#[test]
fn pattern_rejects_unknown_symbol() {
    let m = toy_model();
    assert!(SymbolicPattern::parse(&m, "Z^1").is_err());
}
