//! Treatment regimes indexed by (natural treatment value a′, stratum).

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Action {
    Treat0,
    Treat1,
    Ambiguous,
    /// Stochastic rule: treat with this probability.
    Prob(f64),
}

impl Action {
    pub fn from_bit(a: u8) -> Self {
        if a == 1 {
            Action::Treat1
        } else {
            Action::Treat0
        }
    }

    /// Probability of assigning treatment 1, if the action is defined.
    pub fn p_treat(self) -> Option<f64> {
        match self {
            Action::Treat0 => Some(0.0),
            Action::Treat1 => Some(1.0),
            Action::Prob(p) => Some(p),
            Action::Ambiguous => None,
        }
    }

    pub fn bit(self) -> Option<u8> {
        match self {
            Action::Treat0 => Some(0),
            Action::Treat1 => Some(1),
            _ => None,
        }
    }

    fn to_json(self) -> Value {
        match self {
            Action::Treat0 => Value::from(0),
            Action::Treat1 => Value::from(1),
            Action::Ambiguous => Value::from("ambiguous"),
            Action::Prob(p) => Value::from(p),
        }
    }

    fn from_json(v: &Value) -> Result<Self> {
        if let Some(i) = v.as_u64() {
            return match i {
                0 => Ok(Action::Treat0),
                1 => Ok(Action::Treat1),
                _ => Err(Error::schema(None, format!("action must be 0 or 1, got {i}"))),
            };
        }
        if let Some(p) = v.as_f64() {
            if (0.0..=1.0).contains(&p) {
                return Ok(Action::Prob(p));
            }
            return Err(Error::schema(None, format!("probability {p} outside [0,1]")));
        }
        if v.as_str() == Some("ambiguous") {
            return Ok(Action::Ambiguous);
        }
        Err(Error::schema(None, format!("unrecognized action {v}")))
    }
}

/// Total map (a′, stratum) → action. `actions[s][a′]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Regime {
    pub labels: Vec<String>,
    pub actions: Vec<[Action; 2]>,
}

impl Regime {
    pub fn from_fn(labels: &[String], mut f: impl FnMut(usize, usize) -> Action) -> Self {
        let actions = (0..labels.len()).map(|s| [f(s, 0), f(s, 1)]).collect();
        Regime { labels: labels.to_vec(), actions }
    }

    /// Follow the natural treatment value.
    pub fn observed(labels: &[String]) -> Self {
        Regime::from_fn(labels, |_, ap| Action::from_bit(ap as u8))
    }

    pub fn constant(labels: &[String], a: u8) -> Self {
        Regime::from_fn(labels, |_, _| Action::from_bit(a))
    }

    /// Regime that ignores a′: `g(l)` per stratum.
    pub fn from_l(labels: &[String], per_stratum: &[u8]) -> Self {
        Regime::from_fn(labels, |s, _| Action::from_bit(per_stratum[s]))
    }

    pub fn get(&self, stratum: usize, a_prime: usize) -> Action {
        self.actions[stratum][a_prime]
    }

    pub fn is_deterministic(&self) -> bool {
        self.actions.iter().flatten().all(|a| a.bit().is_some())
    }

    pub fn stratum_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Re-order to match `labels`; errors when a label is missing.
    pub fn aligned_to(&self, labels: &[String]) -> Result<Regime> {
        let mut actions = Vec::with_capacity(labels.len());
        for l in labels {
            let i = self
                .stratum_index(l)
                .ok_or_else(|| Error::schema(None, format!("regime has no entry for stratum {l}")))?;
            actions.push(self.actions[i]);
        }
        Ok(Regime { labels: labels.to_vec(), actions })
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (l, acts) in self.labels.iter().zip(&self.actions) {
            let mut e = Map::new();
            e.insert("a0".into(), acts[0].to_json());
            e.insert("a1".into(), acts[1].to_json());
            m.insert(l.clone(), Value::Object(e));
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Regime> {
        let obj = v.as_object().ok_or_else(|| Error::schema(None, "regime must be a JSON object"))?;
        let mut labels = Vec::new();
        let mut actions = Vec::new();
        for (l, e) in obj {
            let e = e.as_object().ok_or_else(|| Error::schema(None, format!("stratum {l}: expected {{a0, a1}}")))?;
            if e.len() != 2 {
                return Err(Error::schema(None, format!("stratum {l}: expected exactly keys a0 and a1")));
            }
            let get = |k: &str| {
                e.get(k)
                    .ok_or_else(|| Error::schema(None, format!("stratum {l}: missing {k}")))
                    .and_then(Action::from_json)
            };
            labels.push(l.clone());
            actions.push([get("a0")?, get("a1")?]);
        }
        Ok(Regime { labels, actions })
    }

    pub fn from_json_str(s: &str) -> Result<Regime> {
        let v: Value = serde_json::from_str(s)?;
        Regime::from_json(&v)
    }
}
