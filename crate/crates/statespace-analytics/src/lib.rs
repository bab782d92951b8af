//! State-space accounting: how many counting-equivalent global states exist,
//! how many of them are correct under each correctness definition, and a
//! brute-force classifier that double-checks the closed forms exactly.

use gfsm_core::{check_correctness, CorrectnessDef, GlobalState, ModelError, ProtocolModel, Verdict};

/// Exact binomial C(n, k) in integer arithmetic; any negative or oversized
/// argument counts as 0, which keeps the closed forms total over n >= 0.
pub fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut res: u128 = 1;
    for i in 0..k {
        // multiply first, divide by (i+1); the running product stays integral
        res = res
            .checked_mul(n - i)
            .expect("binomial overflow")
            / (i + 1);
    }
    res
}

/// Number of counting-equivalent global states: C(n+s-1, n) multisets of n
/// routers over s symbols.
pub fn count_equiv_states(n: u64, s: u64) -> u128 {
    binomial(n as i64 + s as i64 - 1, n as i64)
}

/// Closed-form count of correct states over a 10-symbol alphabet.
///
/// Definition 1 (forwarder = F, expecting = NH):
///   C(n+s-3, n) + C(n+s-4, n-2)
/// Definition 2 (forwarders {F, F_Del}, expecting {NH, NH_Rtx}):
///   C(n+s-5, n) + 4*C(n+s-5, n-2) - 2*C(n+s-6, n-3)
pub fn count_correct(n: u64, s: u64, definition: u8) -> u128 {
    let n = n as i64;
    let s = s as i64;
    match definition {
        1 => binomial(n + s - 3, n) + binomial(n + s - 4, n - 2),
        2 => {
            binomial(n + s - 5, n) + 4 * binomial(n + s - 5, n - 2)
                - 2 * binomial(n + s - 6, n - 3)
        }
        other => panic!("correctness definition must be 1 or 2, got {}", other),
    }
}

/// Exact counts for one (n, definition) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceCount {
    pub n: u64,
    pub s: u64,
    pub definition: u8,
    pub total: u128,
    pub correct: u128,
    pub error: u128,
}

impl SpaceCount {
    pub fn correct_pct(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.correct as f64 / self.total as f64 * 100.0
    }
}

/// Enumerate every size-n multiset over the model alphabet, classify each
/// against the correctness definition, and verify on the way that the
/// correct/error split is a genuine partition (complete and disjoint).
pub fn brute_force_classify(
    model: &ProtocolModel,
    def: &CorrectnessDef,
    n: u64,
) -> Result<SpaceCount, ModelError> {
    let s = model.states.len();
    let mut total = 0u128;
    let mut correct = 0u128;
    let mut counts = vec![0u16; s];
    // multiset enumeration: distribute n among s symbols
    fn rec(
        model: &ProtocolModel,
        def: &CorrectnessDef,
        counts: &mut Vec<u16>,
        idx: usize,
        left: u16,
        total: &mut u128,
        correct: &mut u128,
    ) -> Result<(), ModelError> {
        if idx == counts.len() - 1 {
            counts[idx] = left;
            let g = GlobalState::from_counts(counts.clone());
            *total += 1;
            let verdict = check_correctness(model, &g, def)?;
            let pattern_correct = verdict == Verdict::Correct;
            // classifier route: correct iff exactly one forwarder with >= 1
            // expecting, or no forwarders and nobody expecting
            let f = def.forwarder_count(&g);
            let e = def.expecting_count(&g);
            let class_correct = (f == 0 && e == 0) || (f == 1 && e >= 1);
            if pattern_correct != class_correct {
                return Err(ModelError::Invalid(format!(
                    "partition violated at {}: patterns say {}, classes say {}",
                    g.display(model),
                    pattern_correct,
                    class_correct
                )));
            }
            if pattern_correct {
                *correct += 1;
            }
            counts[idx] = 0;
            return Ok(());
        }
        for k in 0..=left {
            counts[idx] = k;
            rec(model, def, counts, idx + 1, left - k, total, correct)?;
            counts[idx] = 0;
        }
        Ok(())
    }
    rec(model, def, &mut counts, 0, n as u16, &mut total, &mut correct)?;
    let definition = if def.forwarders.len() == 1 { 1 } else { 2 };
    Ok(SpaceCount {
        n,
        s: s as u64,
        definition,
        total,
        correct,
        error: total - correct,
    })
}

/// Closed-form counts for one (n, definition) pair over a 10-symbol model.
pub fn closed_form(n: u64, s: u64, definition: u8) -> SpaceCount {
    let total = count_equiv_states(n, s);
    let correct = count_correct(n, s, definition);
    SpaceCount {
        n,
        s,
        definition,
        total,
        correct,
        error: total - correct,
    }
}
