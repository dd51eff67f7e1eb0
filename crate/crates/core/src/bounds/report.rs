use serde::Serialize;

use crate::json::Num;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `lhs <= rhs`
    Le,
    /// `lhs == rhs`
    Eq,
}

/// One checked inequality or identity. Pointwise checks keep the profile
/// with the smallest slack.
#[derive(Clone, Debug, PartialEq)]
pub struct GapCheck<T> {
    pub id: String,
    pub relation: Relation,
    pub lhs: T,
    pub rhs: T,
    pub witness_profile: Option<Vec<usize>>,
    /// Profiles examined; 0 for a check on expectations.
    pub profiles: usize,
}

impl<T: Scalar> GapCheck<T> {
    pub fn le(id: impl Into<String>, lhs: T, rhs: T) -> Self {
        GapCheck {
            id: id.into(),
            relation: Relation::Le,
            lhs,
            rhs,
            witness_profile: None,
            profiles: 0,
        }
    }

    pub fn eq(id: impl Into<String>, lhs: T, rhs: T) -> Self {
        GapCheck {
            relation: Relation::Eq,
            ..Self::le(id, lhs, rhs)
        }
    }

    /// `rhs - lhs` for inequalities, `-|lhs - rhs|` for identities.
    pub fn slack(&self) -> T {
        match self.relation {
            Relation::Le => self.rhs.clone() - self.lhs.clone(),
            Relation::Eq => T::zero() - (self.lhs.clone() - self.rhs.clone()).abs_val(),
        }
    }

    pub fn ratio(&self) -> Option<T> {
        (!self.rhs.is_zero()).then(|| self.lhs.clone() / self.rhs.clone())
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::Le => self.lhs.le_tol(&self.rhs),
            Relation::Eq => self.lhs.near(&self.rhs),
        }
    }

    pub fn is_pointwise(&self) -> bool {
        self.profiles > 0
    }

    pub fn to_json(&self) -> GapCheckJson<T> {
        GapCheckJson {
            inequality: self.id.clone(),
            relation: self.relation,
            lhs: Num(self.lhs.clone()),
            rhs: Num(self.rhs.clone()),
            slack: Num(self.slack()),
            ratio: self.ratio().map(|r| r.to_f64()),
            witness_profile: self.witness_profile.clone(),
            profiles: self.profiles,
            passed: self.passed(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct GapCheckJson<T: Scalar> {
    pub inequality: String,
    pub relation: Relation,
    pub lhs: Num<T>,
    pub rhs: Num<T>,
    pub slack: Num<T>,
    pub ratio: Option<f64>,
    pub witness_profile: Option<Vec<usize>>,
    pub profiles: usize,
    pub passed: bool,
}

/// Accumulates a pointwise check over profiles, keeping the tightest one.
#[derive(Clone, Debug)]
pub struct Pointwise<T> {
    worst: Option<GapCheck<T>>,
    id: String,
    relation: Relation,
    profiles: usize,
}

impl<T: Scalar> Pointwise<T> {
    pub fn le(id: impl Into<String>) -> Self {
        Pointwise {
            worst: None,
            id: id.into(),
            relation: Relation::Le,
            profiles: 0,
        }
    }

    pub fn eq(id: impl Into<String>) -> Self {
        Pointwise {
            relation: Relation::Eq,
            ..Self::le(id)
        }
    }

    pub fn observe(&mut self, profile: &[usize], lhs: T, rhs: T) {
        self.profiles += 1;
        let check = GapCheck {
            id: self.id.clone(),
            relation: self.relation,
            lhs,
            rhs,
            witness_profile: Some(profile.to_vec()),
            profiles: 0,
        };
        let tighter = match &self.worst {
            None => true,
            Some(w) => w.slack().definitely_gt(&check.slack()),
        };
        if tighter {
            self.worst = Some(check);
        }
    }

    /// The tightest observation; a vacuous `0 <= 0` if nothing was observed.
    pub fn finish(self) -> GapCheck<T> {
        let mut check = self.worst.unwrap_or_else(|| GapCheck {
            id: self.id.clone(),
            relation: self.relation,
            lhs: T::zero(),
            rhs: T::zero(),
            witness_profile: None,
            profiles: 0,
        });
        check.profiles = self.profiles.max(1);
        check
    }
}

/// All checks run on one instance, plus the quantities they were built from.
#[derive(Clone, Debug, PartialEq)]
pub struct GapReport<T> {
    pub instance_id: String,
    pub checks: Vec<GapCheck<T>>,
    pub values: Vec<(String, T)>,
    pub notes: Vec<String>,
}

impl<T: Scalar> GapReport<T> {
    pub fn new(instance_id: impl Into<String>) -> Self {
        GapReport {
            instance_id: instance_id.into(),
            checks: Vec::new(),
            values: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, check: GapCheck<T>) {
        self.checks.push(check);
    }

    pub fn value(&mut self, name: impl Into<String>, v: T) {
        self.values.push((name.into(), v));
    }

    pub fn get_value(&self, name: &str) -> Option<&T> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn check(&self, id: &str) -> Option<&GapCheck<T>> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(GapCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &GapCheck<T>> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_json(&self) -> GapReportJson<T> {
        GapReportJson {
            instance_id: self.instance_id.clone(),
            passed: self.passed(),
            checks: self.checks.iter().map(GapCheck::to_json).collect(),
            values: self
                .values
                .iter()
                .map(|(n, v)| NamedValue {
                    name: n.clone(),
                    value: Num(v.clone()),
                })
                .collect(),
            notes: self.notes.clone(),
        }
    }

    /// Rows of `instance_id, inequality_id, lhs, rhs, slack, ratio`.
    pub fn csv_rows(&self) -> Vec<[String; 6]> {
        self.checks
            .iter()
            .map(|c| {
                [
                    self.instance_id.clone(),
                    c.id.clone(),
                    c.lhs.render(),
                    c.rhs.render(),
                    c.slack().render(),
                    c.ratio()
                        .map(|r| format!("{}", r.to_f64()))
                        .unwrap_or_default(),
                ]
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct NamedValue<T: Scalar> {
    pub name: String,
    pub value: Num<T>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct GapReportJson<T: Scalar> {
    pub instance_id: String,
    pub passed: bool,
    pub checks: Vec<GapCheckJson<T>>,
    pub values: Vec<NamedValue<T>>,
    pub notes: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn pointwise_keeps_tightest_profile() {
        let mut pw = Pointwise::le("x");
        pw.observe(&[0], q(1, 1), q(3, 1));
        pw.observe(&[1], q(2, 1), q(5, 2));
        pw.observe(&[2], q(0, 1), q(1, 1));
        let c = pw.finish();
        assert_eq!(c.witness_profile, Some(vec![1]));
        assert_eq!(c.slack(), q(1, 2));
        assert_eq!(c.profiles, 3);
        assert!(c.passed());
    }

    #[test]
    fn identity_slack_is_nonpositive() {
        let c = GapCheck::eq("id", q(1, 3), q(1, 2));
        assert_eq!(c.slack(), q(-1, 6));
        assert!(!c.passed());
        assert!(GapCheck::eq("id", q(1, 2), q(1, 2)).passed());
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut r = GapReport::new("s1-0001");
        r.push(GapCheck::le("lottery-le-4x-pricing", q(3, 2), q(4, 1)));
        let rows = r.csv_rows();
        assert_eq!(
            rows[0][..5],
            ["s1-0001", "lottery-le-4x-pricing", "3/2", "4", "5/2"].map(String::from)
        );
        assert_eq!(rows[0][5], "0.375");
        let json = serde_json::to_value(r.to_json()).unwrap();
        assert_eq!(json["checks"][0]["inequality"], "lottery-le-4x-pricing");
        assert_eq!(json["checks"][0]["slack"], "5/2");
    }
}
