//! Check reports and 17-significant-digit float serialization.

use serde::ser::{Serialize, SerializeStruct, Serializer};
use serde_json::value::RawValue;

/// Default relative slack on inequality checks.
pub const REL_SLACK: f64 = 1e-9;
/// Default absolute slack on inequality checks.
pub const ABS_SLACK: f64 = 1e-12;

/// Renders a double with 17 significant digits; non-finite values become
/// `inf`, `-inf` or `NaN`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Serializes a float as a raw JSON number with 17 significant digits, or
/// as a string when it is not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(fmt_f64(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_str(&fmt_f64(self.0))
        }
    }
}

/// One verified inequality (or identity) with its two sides.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: Option<f64>,
    pub pass: bool,
    pub witness: Option<String>,
    pub rel_slack: f64,
    pub abs_slack: f64,
}

impl CheckReport {
    /// `lhs <= rhs`, with the default slack.
    pub fn inequality(name: impl Into<String>, instance: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self::inequality_with_slack(name, instance, lhs, rhs, REL_SLACK, ABS_SLACK)
    }

    pub fn inequality_with_slack(
        name: impl Into<String>,
        instance: impl Into<String>,
        lhs: f64,
        rhs: f64,
        rel: f64,
        abs: f64,
    ) -> Self {
        let pass = lhs <= rhs + rel * rhs.abs() + abs;
        Self {
            name: name.into(),
            instance: instance.into(),
            lhs,
            rhs,
            constant: None,
            pass,
            witness: None,
            rel_slack: rel,
            abs_slack: abs,
        }
    }

    /// `|lhs - rhs| <= rel * max(|lhs|, |rhs|) + abs`.
    pub fn identity(
        name: impl Into<String>,
        instance: impl Into<String>,
        lhs: f64,
        rhs: f64,
        rel: f64,
        abs: f64,
    ) -> Self {
        let pass = (lhs - rhs).abs() <= rel * lhs.abs().max(rhs.abs()) + abs;
        Self {
            name: name.into(),
            instance: instance.into(),
            lhs,
            rhs,
            constant: None,
            pass,
            witness: None,
            rel_slack: rel,
            abs_slack: abs,
        }
    }

    /// A report for a check that does not apply; it counts as a pass.
    pub fn not_applicable(name: impl Into<String>, instance: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            instance: instance.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            constant: None,
            pass: true,
            witness: Some(format!("not applicable: {}", reason.into())),
            rel_slack: 0.0,
            abs_slack: 0.0,
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }

    /// Attaches a witness; by convention only failing reports carry one
    /// unless `always` is set.
    pub fn with_witness(mut self, w: impl Into<String>, always: bool) -> Self {
        if always || !self.pass {
            self.witness = Some(w.into());
        }
        self
    }

    pub fn failed(&self) -> bool {
        !self.pass
    }
}

impl Serialize for CheckReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let len = 6 + usize::from(self.witness.is_some());
        let mut st = s.serialize_struct("CheckReport", len)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("instance", &self.instance)?;
        st.serialize_field("lhs", &Sig17(self.lhs))?;
        st.serialize_field("rhs", &Sig17(self.rhs))?;
        st.serialize_field("constant", &self.constant.map(Sig17))?;
        st.serialize_field("pass", &self.pass)?;
        if let Some(w) = &self.witness {
            st.serialize_field("witness", w)?;
        }
        st.end()
    }
}

/// Instance tag from a float table.
pub fn instance_tag(prefix: &str, values: &[f64]) -> String {
    format!("{prefix}:{:016x}", crate::numeric::fingerprint(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rule() {
        assert!(CheckReport::inequality("a", "i", 1.0, 1.0).pass);
        assert!(CheckReport::inequality("a", "i", 1.0 + 5e-10, 1.0).pass);
        assert!(!CheckReport::inequality("a", "i", 1.0 + 5e-9, 1.0).pass);
        assert!(CheckReport::inequality("a", "i", 1e-13, 0.0).pass);
        assert!(!CheckReport::identity("b", "i", 1.0, 1.1, 1e-9, 0.0).pass);
    }

    #[test]
    fn json_shape() {
        let r = CheckReport::inequality("x", "inst", 1.0 / 3.0, 0.5).with_constant(2.0);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"name":"x","instance":"inst","lhs":3.3333333333333331e-1,"rhs":5.0000000000000000e-1,"constant":2.0000000000000000e0,"pass":true}"#
        );
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["lhs"].as_f64().unwrap(), 1.0 / 3.0);
        let na = serde_json::to_string(&CheckReport::not_applicable("y", "i", "why")).unwrap();
        assert!(na.contains(r#""lhs":"NaN""#));
    }

    #[test]
    fn round_trip_digits() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), 1e-300, 6.02e23, -4.5] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
