use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Two annotators' labels for the same items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    item_ids: Vec<String>,
    labels_a: Vec<String>,
    labels_b: Vec<String>,
    label_set: BTreeSet<String>,
}

impl AnnotationSet {
    pub fn new(
        item_ids: Vec<String>,
        labels_a: Vec<String>,
        labels_b: Vec<String>,
        label_set: BTreeSet<String>,
    ) -> Result<Self, EvalError> {
        if labels_a.len() != item_ids.len() || labels_b.len() != item_ids.len() {
            return Err(EvalError::AnnotationLengthMismatch {
                items: item_ids.len(),
                a: labels_a.len(),
                b: labels_b.len(),
            });
        }
        if let Some(label) = labels_a.iter().chain(&labels_b).find(|l| !label_set.contains(*l)) {
            return Err(EvalError::UnknownLabel { label: label.clone() });
        }
        Ok(Self {
            item_ids,
            labels_a,
            labels_b,
            label_set,
        })
    }

    /// Declares the label set as whatever labels occur.
    pub fn inferred(item_ids: Vec<String>, labels_a: Vec<String>, labels_b: Vec<String>) -> Result<Self, EvalError> {
        let label_set = labels_a.iter().chain(&labels_b).cloned().collect();
        Self::new(item_ids, labels_a, labels_b, label_set)
    }

    pub fn len(&self) -> usize {
        self.item_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_ids.is_empty()
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn labels_a(&self) -> &[String] {
        &self.labels_a
    }

    pub fn labels_b(&self) -> &[String] {
        &self.labels_b
    }

    pub fn label_set(&self) -> &BTreeSet<String> {
        &self.label_set
    }

    pub fn swapped(&self) -> Self {
        Self {
            item_ids: self.item_ids.clone(),
            labels_a: self.labels_b.clone(),
            labels_b: self.labels_a.clone(),
            label_set: self.label_set.clone(),
        }
    }
}

/// `(po - pe) / (1 - pe)`; 1 when both annotators use a single shared label.
pub fn cohen_kappa(annotations: &AnnotationSet) -> Result<f64, EvalError> {
    let n = annotations.len();
    if n == 0 {
        return Err(EvalError::NoAnnotations);
    }
    let mut marginals: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut agree = 0;
    for (a, b) in annotations.labels_a.iter().zip(&annotations.labels_b) {
        marginals.entry(a).or_default().0 += 1;
        marginals.entry(b).or_default().1 += 1;
        agree += usize::from(a == b);
    }
    let total = n as f64;
    let po = agree as f64 / total;
    let pe: f64 = marginals
        .values()
        .map(|&(a, b)| (a as f64 / total) * (b as f64 / total))
        .sum();
    if pe == 1.0 {
        return Ok(1.0);
    }
    Ok((po - pe) / (1.0 - pe))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(a: &[&str], b: &[&str]) -> AnnotationSet {
        let ids = (0..a.len()).map(|i| i.to_string()).collect();
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        AnnotationSet::inferred(ids, own(a), own(b)).unwrap()
    }

    #[test]
    fn hand_cases() {
        assert_eq!(cohen_kappa(&set(&["1", "1", "0", "0"], &["1", "0", "1", "0"])).unwrap(), 0.0);
        assert_eq!(cohen_kappa(&set(&["x", "y", "x"], &["x", "y", "x"])).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&set(&["x", "x"], &["x", "x"])).unwrap(), 1.0);
        // po = 0, pe = 0.5.
        assert_eq!(cohen_kappa(&set(&["a", "b"], &["b", "a"])).unwrap(), -1.0);
    }

    #[test]
    fn validation() {
        let ids = vec!["i".to_string()];
        let one = vec!["a".to_string()];
        assert!(matches!(
            AnnotationSet::new(ids.clone(), one.clone(), vec![], BTreeSet::from(["a".to_string()])),
            Err(EvalError::AnnotationLengthMismatch { .. })
        ));
        assert!(matches!(
            AnnotationSet::new(ids, one.clone(), vec!["z".into()], BTreeSet::from(["a".to_string()])),
            Err(EvalError::UnknownLabel { .. })
        ));
        let empty = AnnotationSet::inferred(vec![], vec![], vec![]).unwrap();
        assert!(cohen_kappa(&empty).is_err());
    }
}
