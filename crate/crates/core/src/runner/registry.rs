//! Named ablation configurations.

use crate::error::{Error, Result};
use crate::plasticity::{EwcMode, Flags, Mechanism, MechanismConfig};

pub const CONFIG_NAMES: [&str; 14] = [
    "full_mpcs",
    "no_ewc",
    "no_replay",
    "no_gating",
    "no_fourier",
    "no_importance",
    "no_hebbian",
    "no_pruning",
    "no_similarity",
    "no_adaptive_growth",
    "baseline_minimal",
    "ewc_topologie",
    "ewc_topology_pertask",
    "mpcs_efficient",
];

pub fn flags_for(name: &str) -> Result<Flags> {
    let full = Flags::all_on();
    let flags = match name {
        "full_mpcs" => full,
        "no_ewc" => full.without(Mechanism::Ewc),
        "no_replay" => full.without(Mechanism::Replay),
        "no_gating" => full.without(Mechanism::Gating),
        "no_fourier" => full.without(Mechanism::Fourier),
        "no_importance" => full.without(Mechanism::Importance),
        "no_hebbian" => full.without(Mechanism::Hebbian),
        "no_pruning" => full.without(Mechanism::Pruning),
        "no_similarity" => full.without(Mechanism::Similarity),
        "no_adaptive_growth" => full.without(Mechanism::AdaptiveGrowth),
        "baseline_minimal" => Flags::all_off(),
        "ewc_topologie" => Flags {
            use_ewc: EwcMode::Topo,
            ..full
        },
        "ewc_topology_pertask" => Flags {
            use_ewc: EwcMode::TopoPertask,
            ..full
        },
        "mpcs_efficient" => full.without(Mechanism::Ewc).without(Mechanism::Hebbian),
        other => return Err(Error::UnknownConfig(other.to_string())),
    };
    Ok(flags)
}

pub fn config(name: &str) -> Result<MechanismConfig> {
    Ok(MechanismConfig::new(name, flags_for(name)?))
}

pub fn registry() -> Vec<MechanismConfig> {
    CONFIG_NAMES
        .iter()
        .map(|n| config(n).expect("registered name"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourteen_distinct_configs() {
        let r = registry();
        assert_eq!(r.len(), 14);
        for (i, a) in r.iter().enumerate() {
            for b in &r[i + 1..] {
                assert_ne!(a.flags, b.flags, "{} vs {}", a.name, b.name);
            }
        }
    }

    #[test]
    fn single_ablations_remove_one_mechanism() {
        let full = Flags::all_on();
        for name in &CONFIG_NAMES[1..10] {
            assert_eq!(flags_for(name).unwrap().removed_relative_to(&full).len(), 1, "{name}");
        }
        assert_eq!(
            flags_for("baseline_minimal").unwrap().removed_relative_to(&full).len(),
            9
        );
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(config("nope"), Err(Error::UnknownConfig(_))));
    }
}
