use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DensityModel, ExpressionFamily, Support, TabulatedFamily};
use crate::error::{Error, Result};

/// Family selection by name plus `key=value` parameters.
///
/// | name                 | parameters                                              |
/// |----------------------|---------------------------------------------------------|
/// | `normal`             | none                                                    |
/// | `logistic`           | none                                                    |
/// | `student-t`          | `nu` (degrees of freedom)                               |
/// | `expression`         | `expr`, optional `lower`, `upper`, `scale`, `symmetric` |
/// | `tabulated`          | `table` (CSV path), optional `symmetric`                |
///
/// Every family also accepts `loc` to shift it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default, deserialize_with = "scalar_map")]
    pub params: BTreeMap<String, String>,
}

/// Accepts numbers and booleans as parameter values, so `nu = 7` works as
/// well as `nu = "7"`.
fn scalar_map<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<String, String>, D::Error> {
    use serde::de::Error as _;
    let raw = BTreeMap::<String, serde_json::Value>::deserialize(d)?;
    raw.into_iter()
        .map(|(k, v)| {
            let s = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                other => return Err(D::Error::custom(format!("parameter `{k}` must be a scalar, got {other}"))),
            };
            Ok((k, s))
        })
        .collect()
}

impl FamilySpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// Parses `key=value` pairs as given on the command line.
    pub fn parse_params<'a, I: IntoIterator<Item = &'a str>>(mut self, pairs: I) -> Result<Self> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Family(format!("parameter `{p}` is not of the form key=value")))?;
            self.params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(self)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.params
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Family(format!("parameter `{key}` = `{v}` is not a number")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.params.get(key).map(String::as_str) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(v) => Err(Error::Family(format!("parameter `{key}` = `{v}` is not a boolean"))),
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for k in self.params.keys() {
            if k != "loc" && !allowed.contains(&k.as_str()) {
                return Err(Error::Family(format!("unknown parameter `{k}` for family `{}`", self.name)));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<DensityModel> {
        let model = match self.name.as_str() {
            "normal" | "gaussian" => {
                self.check_keys(&[])?;
                DensityModel::normal()
            }
            "logistic" => {
                self.check_keys(&[])?;
                DensityModel::logistic()
            }
            "student-t" | "student_t" | "t" => {
                self.check_keys(&["nu"])?;
                let nu = self
                    .number("nu")?
                    .ok_or_else(|| Error::Family("student-t requires parameter `nu`".into()))?;
                DensityModel::student_t(nu)?
            }
            "expression" => {
                self.check_keys(&["expr", "lower", "upper", "scale", "symmetric"])?;
                let expr = self
                    .params
                    .get("expr")
                    .ok_or_else(|| Error::Family("expression family requires parameter `expr`".into()))?;
                let support = Support::new(
                    self.number("lower")?.unwrap_or(f64::NEG_INFINITY),
                    self.number("upper")?.unwrap_or(f64::INFINITY),
                )?;
                let scale = self.number("scale")?.unwrap_or(1.0);
                DensityModel::new(ExpressionFamily::new(expr, support, scale, self.flag("symmetric")?)?)
            }
            "tabulated" => {
                self.check_keys(&["table", "symmetric"])?;
                let path = self
                    .params
                    .get("table")
                    .ok_or_else(|| Error::Family("tabulated family requires parameter `table`".into()))?;
                DensityModel::new(TabulatedFamily::from_csv_path(Path::new(path), self.flag("symmetric")?)?)
            }
            other => return Err(Error::Family(format!("unknown family `{other}`"))),
        };
        Ok(match self.number("loc")? {
            Some(c) => model.shifted(c),
            None => model,
        })
    }
}
