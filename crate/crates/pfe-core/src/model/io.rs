//! Model file formats.
//!
//! Two formats are supported, chosen by file extension (`.json` for the
//! structured form, anything else for the text edge list):
//!
//! Text edge list — UTF-8 lines; `#` starts a comment; optional header
//! `vartype spin|binary` (default spin); `offset w` sets the constant term;
//! a data line `i j w` holds integer indices and a decimal coefficient, with
//! `i == j` denoting a linear term. Variable count is one past the largest
//! index seen.
//!
//! JSON — a document `{n, vartype, linear: [[i, w], ...],
//! quadratic: [[i, j, w], ...], offset}`. Coefficients round-trip exactly:
//! both writers emit the shortest decimal form that parses back to the same
//! value.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::model::{IsingModel, QuboModel, VarType};
use crate::Scalar;

/// A model in either variable domain, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel<T> {
    Spin(IsingModel<T>),
    Binary(QuboModel<T>),
}

impl<T: Scalar> AnyModel<T> {
    pub fn vartype(&self) -> VarType {
        match self {
            AnyModel::Spin(_) => VarType::Spin,
            AnyModel::Binary(_) => VarType::Binary,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AnyModel::Spin(m) => m.n(),
            AnyModel::Binary(m) => m.n(),
        }
    }

    /// View as an Ising model, converting a binary model via `s = 2x−1`.
    pub fn into_ising(self) -> IsingModel<T> {
        match self {
            AnyModel::Spin(m) => m,
            AnyModel::Binary(q) => q.to_ising(),
        }
    }
}

/// Load a model file, dispatching on the `.json` extension.
pub fn load_model<T>(path: &Path) -> Result<AnyModel<T>>
where
    T: Scalar + std::str::FromStr + DeserializeOwned,
{
    if path.extension().is_some_and(|e| e == "json") {
        load_json(path)
    } else {
        load_text(path)
    }
}

/// Save a model file, dispatching on the `.json` extension.
pub fn save_model<T>(model: &AnyModel<T>, path: &Path) -> Result<()>
where
    T: Scalar + Serialize,
{
    if path.extension().is_some_and(|e| e == "json") {
        save_json(model, path)
    } else {
        save_text(model, path)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::Deserialize<'de>"))]
struct ModelJson<T> {
    n: usize,
    vartype: VarType,
    linear: Vec<(usize, T)>,
    quadratic: Vec<(usize, usize, T)>,
    offset: T,
}

pub fn load_json<T>(path: &Path) -> Result<AnyModel<T>>
where
    T: Scalar + DeserializeOwned,
{
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let doc: ModelJson<T> = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    build_model(doc).map_err(|message| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        message,
    })
}

pub fn save_json<T>(model: &AnyModel<T>, path: &Path) -> Result<()>
where
    T: Scalar + Serialize,
{
    let doc = to_doc(model);
    let mut text = serde_json::to_string_pretty(&doc).expect("model serialization");
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn to_doc<T: Scalar>(model: &AnyModel<T>) -> ModelJson<T> {
    match model {
        AnyModel::Spin(m) => ModelJson {
            n: m.n(),
            vartype: VarType::Spin,
            linear: m.linear_entries().collect(),
            quadratic: m.edges().collect(),
            offset: m.offset(),
        },
        AnyModel::Binary(q) => {
            let mut linear = Vec::new();
            let mut quadratic = Vec::new();
            for (i, j, w) in q.terms() {
                if i == j {
                    linear.push((i, w));
                } else {
                    quadratic.push((i, j, w));
                }
            }
            ModelJson {
                n: q.n(),
                vartype: VarType::Binary,
                linear,
                quadratic,
                offset: q.offset(),
            }
        }
    }
}

fn build_model<T: Scalar>(doc: ModelJson<T>) -> std::result::Result<AnyModel<T>, String> {
    let mut raw = RawModel::new(doc.n);
    raw.vartype = doc.vartype;
    raw.offset = doc.offset;
    for (i, w) in doc.linear {
        raw.push_linear(i, w).map_err(|m| format!("linear entry: {m}"))?;
    }
    for (i, j, w) in doc.quadratic {
        raw.push_quadratic(i, j, w)
            .map_err(|m| format!("quadratic entry: {m}"))?;
    }
    Ok(raw.finish())
}

/// Accumulates entries before the variable count is known (text format) and
/// checks the canonical-key invariants shared by both loaders.
struct RawModel<T> {
    n: usize,
    explicit_n: bool,
    vartype: VarType,
    offset: T,
    linear: Vec<(usize, T)>,
    quadratic: Vec<(usize, usize, T)>,
}

impl<T: Scalar> RawModel<T> {
    fn new(n: usize) -> Self {
        Self {
            n,
            explicit_n: n > 0,
            vartype: VarType::Spin,
            offset: T::zero(),
            linear: Vec::new(),
            quadratic: Vec::new(),
        }
    }

    fn check_index(&mut self, i: usize) -> std::result::Result<(), String> {
        if self.explicit_n {
            if i >= self.n {
                return Err(format!("index {i} out of range (n={})", self.n));
            }
        } else if i + 1 > self.n {
            self.n = i + 1;
        }
        Ok(())
    }

    fn push_linear(&mut self, i: usize, w: T) -> std::result::Result<(), String> {
        self.check_index(i)?;
        if self.linear.iter().any(|&(k, _)| k == i) {
            return Err(format!("duplicate linear term for variable {i}"));
        }
        self.linear.push((i, w));
        Ok(())
    }

    fn push_quadratic(&mut self, i: usize, j: usize, w: T) -> std::result::Result<(), String> {
        if i == j {
            return Err(format!("quadratic entry ({i},{j}) must use i != j"));
        }
        self.check_index(i)?;
        self.check_index(j)?;
        let key = if i < j { (i, j) } else { (j, i) };
        if self.quadratic.iter().any(|&(a, b, _)| (a, b) == key) {
            return Err(format!("duplicate coupling for pair ({},{})", key.0, key.1));
        }
        self.quadratic.push((key.0, key.1, w));
        Ok(())
    }

    fn finish(self) -> AnyModel<T> {
        match self.vartype {
            VarType::Spin => {
                let mut m = IsingModel::new(self.n);
                m.set_offset(self.offset);
                for (i, w) in self.linear {
                    m.set_linear(i, w);
                }
                for (i, j, w) in self.quadratic {
                    m.set_coupling(i, j, w);
                }
                AnyModel::Spin(m)
            }
            VarType::Binary => {
                let mut q = QuboModel::new(self.n);
                q.set_offset(self.offset);
                for (i, w) in self.linear {
                    q.set_term(i, i, w);
                }
                for (i, j, w) in self.quadratic {
                    q.set_term(i, j, w);
                }
                AnyModel::Binary(q)
            }
        }
    }
}

pub fn load_text<T>(path: &Path) -> Result<AnyModel<T>>
where
    T: Scalar + std::str::FromStr,
{
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_text(&text).map_err(|(line, message)| Error::Parse {
        path: path.display().to_string(),
        line,
        message,
    })
}

fn parse_text<T>(text: &str) -> std::result::Result<AnyModel<T>, (usize, String)>
where
    T: Scalar + std::str::FromStr,
{
    let mut raw = RawModel::new(0);
    let mut saw_vartype = false;
    let mut saw_offset = false;
    for (idx, full_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = full_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let fail = |msg: String| (lineno, msg);
        match fields[0] {
            "vartype" => {
                if saw_vartype {
                    return Err(fail("duplicate vartype line".into()));
                }
                saw_vartype = true;
                raw.vartype = match fields.get(1) {
                    Some(&"spin") => VarType::Spin,
                    Some(&"binary") => VarType::Binary,
                    other => {
                        return Err(fail(format!(
                            "vartype must be 'spin' or 'binary', got {other:?}"
                        )))
                    }
                };
            }
            "offset" => {
                if saw_offset {
                    return Err(fail("duplicate offset line".into()));
                }
                saw_offset = true;
                let w = fields
                    .get(1)
                    .ok_or_else(|| fail("offset line needs a value".into()))?;
                raw.offset = w
                    .parse::<T>()
                    .map_err(|_| fail(format!("unparseable offset value '{w}'")))?;
            }
            _ => {
                if fields.len() != 3 {
                    return Err(fail(format!(
                        "expected 'i j w' with three fields, got {} field(s)",
                        fields.len()
                    )));
                }
                let i: usize = fields[0]
                    .parse()
                    .map_err(|_| fail(format!("unparseable index '{}'", fields[0])))?;
                let j: usize = fields[1]
                    .parse()
                    .map_err(|_| fail(format!("unparseable index '{}'", fields[1])))?;
                let w: T = fields[2]
                    .parse()
                    .map_err(|_| fail(format!("unparseable coefficient '{}'", fields[2])))?;
                if i == j {
                    raw.push_linear(i, w).map_err(|m| fail(m))?;
                } else {
                    raw.push_quadratic(i, j, w).map_err(|m| fail(m))?;
                }
            }
        }
    }
    Ok(raw.finish())
}

pub fn save_text<T>(model: &AnyModel<T>, path: &Path) -> Result<()>
where
    T: Scalar + Serialize,
{
    let doc = to_doc(model);
    let mut out = String::new();
    out.push_str(match doc.vartype {
        VarType::Spin => "vartype spin\n",
        VarType::Binary => "vartype binary\n",
    });
    if doc.offset != T::zero() {
        out.push_str(&format!("offset {}\n", doc.offset));
    }
    for (i, w) in &doc.linear {
        out.push_str(&format!("{i} {i} {w}\n"));
    }
    for (i, j, w) in &doc.quadratic {
        out.push_str(&format!("{i} {j} {w}\n"));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}
