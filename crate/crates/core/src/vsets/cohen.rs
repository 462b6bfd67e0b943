//! The density step for adding subsets: any finite condition can be
//! extended to separate two given rows.

use std::collections::BTreeMap;

use super::VSetError;

/// A finite partial map from `(label, n)` to a bit.
pub type Condition = BTreeMap<(String, usize), bool>;

/// Extends `t` by `(h, n) ↦ 1` and `(m, n) ↦ 0` for the least `n` at which
/// neither row is defined.
pub fn separating_extension(t: &Condition, h: &str, m: &str) -> Result<Condition, VSetError> {
    if h == m {
        return Err(VSetError::Precondition(
            "cannot separate a row from itself".into(),
        ));
    }
    let used = |label: &str, n: usize| t.contains_key(&(label.to_string(), n));
    let n = (0..)
        .find(|&n| !used(h, n) && !used(m, n))
        .expect("a finite condition leaves some column free");
    let mut s = t.clone();
    s.insert((h.to_string(), n), true);
    s.insert((m.to_string(), n), false);
    Ok(s)
}

/// `s ⊇ t` as partial maps.
pub fn extends(s: &Condition, t: &Condition) -> bool {
    t.iter().all(|(k, v)| s.get(k) == Some(v))
}
