use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of morphological indicator features.
pub const INDICATOR_COUNT: usize = 47;

/// Feature keys, indexed by feature number minus one.
pub const INDICATOR_KEYS: [&str; INDICATOR_COUNT] = [
    "with_subjects",
    "missing_subj",
    "with_human_subjects",
    "with_location_subjects",
    "with_objects",
    "with_human_objects",
    "with_location_objects",
    "trans_any_refl",
    "trans_any_obj3",
    "trans_any_obj23",
    "trans_any_obj123",
    "obj2_obj3_suff",
    "obj3_suff",
    "obj2_obj3_refl_suff",
    "obj3_refl_suff",
    "suff_ish",
    "suff_ir",
    "suff_iz",
    "suff_an",
    "suff_ik",
    "suff_uk",
    "suff_ur",
    "suff_y",
    "suff_w",
    "suff_ir_y",
    "suff_ir_w",
    "suff_an_y",
    "suff_iz_y",
    "suff_y_w",
    "post_suff",
    "mg_rule_r_y_none",
    "mg_rule_r_y_z",
    "obj3_ka_ku",
    "suff_ish_ish",
    "suff_ir_ir",
    "comb_obj3_suff_w",
    "with_nloc_obj_no_suf",
    "suff1_suff2",
    "suff1_suff2_suff3",
    "ni_imperative",
    "ni_conditional",
    "mg_rule_t_y_s",
    "mg_rule_t_y_sh",
    "suff_an_ir",
    "suff_ur_y",
    "suff_ur_w",
    "suff_uk_y",
];

/// Suffix identity features: (feature number, suffix).
pub(crate) const SUFFIX_FEATURES: [(u8, &str); 8] = [
    (16, "ish"),
    (17, "ir"),
    (18, "iz"),
    (19, "an"),
    (20, "ik"),
    (21, "uk"),
    (22, "ur"),
    (23, "y"),
];

/// Adjacent pairs over the suffix sequence followed by the passive `w`.
pub(crate) const PAIR_FEATURES: [(u8, &str, &str); 11] = [
    (25, "ir", "y"),
    (26, "ir", "w"),
    (27, "an", "y"),
    (28, "iz", "y"),
    (29, "y", "w"),
    (34, "ish", "ish"),
    (35, "ir", "ir"),
    (44, "an", "ir"),
    (45, "ur", "y"),
    (46, "ur", "w"),
    (47, "uk", "y"),
];

/// Set of indicator features, numbered 1..=47.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndicatorSet(u64);

impl IndicatorSet {
    pub fn new() -> Self {
        IndicatorSet(0)
    }

    pub fn from_numbers(numbers: &[u8]) -> Self {
        let mut s = IndicatorSet::new();
        for &n in numbers {
            s.insert(n);
        }
        s
    }

    pub fn insert(&mut self, n: u8) {
        assert!((1..=INDICATOR_COUNT as u8).contains(&n), "indicator {n} out of range");
        self.0 |= 1 << (n - 1);
    }

    pub fn set(&mut self, n: u8, on: bool) {
        if on {
            self.insert(n);
        }
    }

    pub fn contains(&self, n: u8) -> bool {
        (1..=INDICATOR_COUNT as u8).contains(&n) && self.0 & (1 << (n - 1)) != 0
    }

    pub fn numbers(&self) -> Vec<u8> {
        (1..=INDICATOR_COUNT as u8).filter(|&n| self.contains(n)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn key(n: u8) -> Option<&'static str> {
        INDICATOR_KEYS.get(usize::from(n).checked_sub(1)?).copied()
    }
}

impl fmt::Debug for IndicatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.numbers()).finish()
    }
}

impl fmt::Display for IndicatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nums: Vec<String> = self.numbers().iter().map(u8::to_string).collect();
        f.write_str(&nums.join(","))
    }
}
