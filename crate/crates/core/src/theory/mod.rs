//! Regime classification and the analytic oracles used to test simulations.
//!
//! [`classify`] maps the condition verdicts of a sequence to what is known
//! about P(M) (eventual monopoly: draws eventually constant) and P(D)
//! (domination: the limit proportion is 0 or 1). Each rule constrains the
//! possible values of the two probabilities; constraints are intersected and
//! closed under M ⊂ D, so the verdict never claims more than the rules give.
//!
//! | rule | hypothesis | P(M) | P(D) |
//! |---|---|---|---|
//! | `positive_monopoly` | Σ 1/τ_n < ∞ | > 0 | |
//! | `almost_sure_monopoly` | Σ 1/τ_n < ∞, liminf σ_n/τ_n > 0 | 1 | 1 |
//! | `domination_dichotomy` | Σ (σ_n/τ_n)² = ∞ | | 1 |
//! | `domination_dichotomy` | Σ (σ_n/τ_n)² < ∞ | | < 1 |
//! | `no_monopoly` | Σ 1/τ_n = ∞ | 0 | |
//! | `no_domination` | Σ 1/τ_n = ∞, RC1, RC2 | 0 | 0 |
//! | `vanishing_reinforcement` | σ_n → 0 | 0 | 0 |

mod laplace;
mod lemma;
mod product;

pub use laplace::{
    check_laplace_recursion, laplace_mc, proposition_delta_bound, CheckOutcome, LaplaceEstimate,
    PropositionCheck, PropositionRow, RecursionCheck, SIGMA_THRESHOLD,
};
pub use lemma::{
    check_lemma_inequality, find_lemma_c, lemma_h, GridCheck, LemmaCReport, DEFAULT_X_MAX, SHARP_C,
};
pub use product::{product_never_white, Horizon, NeverWhiteProduct};

use serde::{Deserialize, Serialize};

use crate::sequence::{
    evaluate_condition, ConditionId, ConditionValue, ConditionVerdict, SequenceSpec,
};

/// What is known about P(M).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonopolyVerdict {
    Zero,
    PositiveLtOne,
    PositiveLeOne,
    One,
    Unknown,
}

/// What is known about P(D).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DominationVerdict {
    Zero,
    PositiveLtOne,
    One,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    PositiveMonopoly,
    AlmostSureMonopoly,
    DominationDichotomy,
    NoMonopoly,
    NoDomination,
    VanishingReinforcement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiredRule {
    pub rule: RuleId,
    pub conditions: Vec<ConditionId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub p_monopoly: MonopolyVerdict,
    pub p_domination: DominationVerdict,
    pub fired: Vec<FiredRule>,
    pub notes: Vec<String>,
    pub conditions: Vec<ConditionVerdict>,
}

// Possible values of a probability as a subset of {0, (0,1), 1}.
const ZERO: u8 = 0b001;
const MID: u8 = 0b010;
const ONE: u8 = 0b100;
const ANY: u8 = 0b111;

fn monopoly_of(set: u8) -> MonopolyVerdict {
    match set {
        ZERO => MonopolyVerdict::Zero,
        MID => MonopolyVerdict::PositiveLtOne,
        0b110 => MonopolyVerdict::PositiveLeOne,
        ONE => MonopolyVerdict::One,
        _ => MonopolyVerdict::Unknown,
    }
}

fn domination_of(set: u8) -> DominationVerdict {
    match set {
        ZERO => DominationVerdict::Zero,
        MID => DominationVerdict::PositiveLtOne,
        ONE => DominationVerdict::One,
        _ => DominationVerdict::Unknown,
    }
}

fn describe(set: u8) -> &'static str {
    match set {
        0b011 => "lies in [0, 1)",
        0b110 => "is positive",
        0b101 => "is 0 or 1",
        _ => "is undetermined",
    }
}

/// Classifies a sequence into the monopoly/domination lattice.
pub fn classify(spec: &SequenceSpec) -> RegimeVerdict {
    let conditions: Vec<ConditionVerdict> = ConditionId::ALL
        .iter()
        .map(|&id| evaluate_condition(spec, id))
        .collect();
    classify_from(conditions)
}

/// Applies the decision table to precomputed condition verdicts.
pub fn classify_from(conditions: Vec<ConditionVerdict>) -> RegimeVerdict {
    use ConditionId::*;
    use ConditionValue::*;
    let value = |id: ConditionId| {
        conditions
            .iter()
            .find(|c| c.condition == id)
            .map_or(Inconclusive, |c| c.value)
    };
    let (harmonic, square, liminf) = (
        value(HarmonicTauDiverges),
        value(SquareSumDiverges),
        value(LiminfRatioPositive),
    );
    let (rc1, rc2, vanish) = (value(Rc1), value(Rc2), value(SigmaVanishes));

    let mut mono = ANY;
    let mut dom = ANY;
    let mut fired = Vec::new();
    let mut notes = Vec::new();
    let mut fire = |rule, conds: &[ConditionId]| {
        fired.push(FiredRule {
            rule,
            conditions: conds.to_vec(),
        })
    };

    if harmonic == Fails {
        mono &= MID | ONE;
        fire(RuleId::PositiveMonopoly, &[HarmonicTauDiverges]);
        if liminf == Holds {
            mono &= ONE;
            dom &= ONE;
            fire(
                RuleId::AlmostSureMonopoly,
                &[HarmonicTauDiverges, LiminfRatioPositive],
            );
        }
    }
    match square {
        Holds => {
            dom &= ONE;
            fire(RuleId::DominationDichotomy, &[SquareSumDiverges]);
        }
        Fails => {
            dom &= ZERO | MID;
            fire(RuleId::DominationDichotomy, &[SquareSumDiverges]);
        }
        Inconclusive => {}
    }
    if harmonic == Holds {
        mono &= ZERO;
        fire(RuleId::NoMonopoly, &[HarmonicTauDiverges]);
        if rc1 == Holds && rc2 == Holds {
            dom &= ZERO;
            fire(RuleId::NoDomination, &[HarmonicTauDiverges, Rc1, Rc2]);
        }
    }
    if vanish == Holds {
        mono &= ZERO;
        dom &= ZERO;
        fire(RuleId::VanishingReinforcement, &[SigmaVanishes]);
    }

    // M ⊂ D
    loop {
        let (m, d) = (mono, dom);
        if mono & ZERO == 0 {
            dom &= MID | ONE;
        }
        if mono == ONE {
            dom &= ONE;
        }
        if dom == ZERO {
            mono &= ZERO;
        }
        if dom & ONE == 0 {
            mono &= ZERO | MID;
        }
        if (m, d) == (mono, dom) {
            break;
        }
    }

    for c in &conditions {
        if c.value == Inconclusive {
            notes.push(format!(
                "{} is inconclusive; rules depending on it were not applied",
                c.condition.name()
            ));
        }
    }
    if mono == 0 || dom == 0 {
        notes.push(
            "fired rules contradict each other; the condition evidence is inconsistent".into(),
        );
        mono = ANY;
        dom = ANY;
    }
    if dom != ANY && domination_of(dom) == DominationVerdict::Unknown {
        notes.push(format!(
            "P(D) {}; finer resolution is not covered by the known results",
            describe(dom)
        ));
    }
    if mono != ANY && monopoly_of(mono) == MonopolyVerdict::Unknown {
        notes.push(format!(
            "P(M) {}; finer resolution is not covered by the known results",
            describe(mono)
        ));
    }

    RegimeVerdict {
        p_monopoly: monopoly_of(mono),
        p_domination: domination_of(dom),
        fired,
        notes,
        conditions,
    }
}

impl MonopolyVerdict {
    /// Rank in the order Zero < positive < One; `None` for Unknown.
    fn strength(self) -> Option<u8> {
        match self {
            MonopolyVerdict::Zero => Some(0),
            MonopolyVerdict::PositiveLtOne | MonopolyVerdict::PositiveLeOne => Some(1),
            MonopolyVerdict::One => Some(2),
            MonopolyVerdict::Unknown => None,
        }
    }
}

impl DominationVerdict {
    fn strength(self) -> Option<u8> {
        match self {
            DominationVerdict::Zero => Some(0),
            DominationVerdict::PositiveLtOne => Some(1),
            DominationVerdict::One => Some(2),
            DominationVerdict::Unknown => None,
        }
    }
}

impl RegimeVerdict {
    /// P(M) never claimed stronger than P(D), and a non-Unknown field is
    /// always backed by a fired rule.
    pub fn is_consistent(&self) -> bool {
        let ordered = match (self.p_monopoly.strength(), self.p_domination.strength()) {
            (Some(m), Some(d)) => m <= d,
            _ => true,
        };
        let backed = !self.fired.is_empty()
            || (self.p_monopoly == MonopolyVerdict::Unknown
                && self.p_domination == DominationVerdict::Unknown);
        ordered && backed
    }
}
