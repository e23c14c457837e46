//! JSON instance and result files.
//!
//! Parsing walks the document by hand so that every schema error carries the
//! JSON pointer of the offending value. Writing is canonical: keys sorted,
//! numbers in the shortest form that round-trips to the same binary64, no
//! insignificant whitespace, one trailing newline.

use std::collections::BTreeMap;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::linalg::{MatrixPencil, ShadowInstance, Spectrahedron, SymMatrix};
use crate::polyhedral::ApproxResult;

pub const FORMAT_VERSION: u64 = 1;
/// Largest accepted asymmetry `|M_ij − M_ji|` of an input matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Largest accepted deviation of a result ray from unit norm.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Problem data `A₀`, `A₁..Aₙ`, `B₁..Bₘ` plus optional strict point, lift
/// witness and interior recession direction.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub n: usize,
    pub m: usize,
    pub ell: usize,
    pub a0: SymMatrix,
    pub a: Vec<SymMatrix>,
    pub b: Vec<SymMatrix>,
    pub interior_point: Option<Vec<f64>>,
    pub lift_witness: Option<Vec<f64>>,
    pub recession_interior_direction: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn from_shadow(s: &ShadowInstance) -> Self {
        InstanceFile {
            n: s.nvars(),
            m: s.nlift(),
            ell: s.dim(),
            a0: s.constant().clone(),
            a: s.pencil_a().mats().to_vec(),
            b: s.pencil_b().mats().to_vec(),
            interior_point: None,
            lift_witness: None,
            recession_interior_direction: None,
        }
    }

    pub fn to_shadow(&self) -> Result<ShadowInstance> {
        let b = if self.b.is_empty() {
            MatrixPencil::empty(self.ell)
        } else {
            MatrixPencil::new(self.b.clone())?
        };
        ShadowInstance::new(MatrixPencil::new(self.a.clone())?, b, self.a0.clone())
    }

    /// The spectrahedron of an instance without lifting variables.
    pub fn to_spectrahedron(&self) -> Result<Spectrahedron> {
        if self.m != 0 {
            return Err(Error::input(
                "instance has lifting variables, it is not a spectrahedron",
            ));
        }
        Spectrahedron::new(MatrixPencil::new(self.a.clone())?, self.a0.clone())
    }
}

/// One homogeneous outer halfspace `normalᵀx ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterHalfspace {
    pub normal: Vec<f64>,
}

/// Outcome of one approximation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultFile {
    /// `"spectra"` or `"shadow"`.
    pub algorithm: String,
    pub epsilon_requested: f64,
    pub epsilon_certified: f64,
    pub certificate_met: bool,
    pub inner_rays: Vec<Vec<f64>>,
    pub outer_halfspaces: Vec<OuterHalfspace>,
    pub iterations: u64,
    pub subproblem_count: u64,
    /// Assumption name to `"pass"`, `"fail"` or `"unverified"`.
    pub assumption_report: BTreeMap<String, String>,
    pub timing_ms: u64,
    /// Set when the iteration limit stopped the run.
    pub partial: bool,
    pub seed: u64,
}

impl ResultFile {
    pub fn from_approx(
        algorithm: &str,
        epsilon_requested: f64,
        r: &ApproxResult,
        assumption_report: BTreeMap<String, String>,
        partial: bool,
        seed: u64,
    ) -> Self {
        ResultFile {
            algorithm: algorithm.to_string(),
            epsilon_requested,
            epsilon_certified: r.epsilon_certified,
            certificate_met: r.certificate_met,
            inner_rays: r.inner.rays().to_vec(),
            outer_halfspaces: r
                .outer
                .halfspaces()
                .iter()
                .map(|h| OuterHalfspace {
                    normal: h.normal.clone(),
                })
                .collect(),
            iterations: r.iterations as u64,
            subproblem_count: r.subproblem_count as u64,
            assumption_report,
            timing_ms: 0,
            partial,
            seed,
        }
    }
}

fn perr(pointer: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn child(ptr: &str, key: &str) -> String {
    format!("{ptr}/{}", key.replace('~', "~0").replace('/', "~1"))
}

fn parse_root(bytes: &[u8]) -> Result<Map<String, Value>> {
    let text = std::str::from_utf8(bytes).map_err(|e| perr("", format!("not UTF-8: {e}")))?;
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(perr("", "top level must be an object")),
        Err(e) => Err(perr("", format!("invalid JSON: {e}"))),
    }
}

fn reject_unknown(obj: &Map<String, Value>, ptr: &str, known: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(perr(&child(ptr, k), "unknown field")),
        None => Ok(()),
    }
}

fn check_version(obj: &Map<String, Value>) -> Result<()> {
    match obj.get("format_version") {
        None => Ok(()),
        Some(v) if v.as_u64() == Some(FORMAT_VERSION) => Ok(()),
        Some(_) => Err(perr(
            "/format_version",
            format!("expected {FORMAT_VERSION}"),
        )),
    }
}

fn required<'v>(obj: &'v Map<String, Value>, ptr: &str, key: &str) -> Result<&'v Value> {
    obj.get(key)
        .ok_or_else(|| perr(&child(ptr, key), "missing required field"))
}

fn as_uint(v: &Value, ptr: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| perr(ptr, "expected a nonnegative integer"))
}

fn as_real(v: &Value, ptr: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| perr(ptr, "expected a finite number"))
}

fn as_bool(v: &Value, ptr: &str) -> Result<bool> {
    v.as_bool().ok_or_else(|| perr(ptr, "expected a boolean"))
}

fn as_array<'v>(v: &'v Value, ptr: &str) -> Result<&'v Vec<Value>> {
    v.as_array().ok_or_else(|| perr(ptr, "expected an array"))
}

fn as_vector(v: &Value, ptr: &str) -> Result<Vec<f64>> {
    as_array(v, ptr)?
        .iter()
        .enumerate()
        .map(|(i, x)| as_real(x, &format!("{ptr}/{i}")))
        .collect()
}

fn as_matrix(v: &Value, ptr: &str, ell: usize) -> Result<SymMatrix> {
    let rows = as_array(v, ptr)?;
    let rows: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| as_vector(r, &format!("{ptr}/{i}")))
        .collect::<Result<_>>()?;
    if rows.len() != ell || rows.iter().any(|r| r.len() != ell) {
        return Err(Error::input(format!("{ptr}: matrix must be {ell}×{ell}")));
    }
    SymMatrix::from_rows(&rows, SYMMETRY_TOL).map_err(|e| Error::input(format!("{ptr}: {e}")))
}

fn as_matrix_list(v: &Value, ptr: &str, ell: usize, len: usize) -> Result<Vec<SymMatrix>> {
    let list = as_array(v, ptr)?;
    if list.len() != len {
        return Err(Error::input(format!(
            "{ptr}: expected {len} matrices, found {}",
            list.len()
        )));
    }
    list.iter()
        .enumerate()
        .map(|(i, m)| as_matrix(m, &format!("{ptr}/{i}"), ell))
        .collect()
}

fn optional_vector(obj: &Map<String, Value>, key: &str, len: usize) -> Result<Option<Vec<f64>>> {
    let ptr = child("", key);
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let x = as_vector(v, &ptr)?;
            if x.len() != len {
                return Err(Error::input(format!("{ptr}: expected length {len}")));
            }
            Ok(Some(x))
        }
    }
}

const INSTANCE_FIELDS: [&str; 10] = [
    "format_version",
    "n",
    "m",
    "ell",
    "A0",
    "A",
    "B",
    "interior_point",
    "lift_witness",
    "recession_interior_direction",
];

pub fn parse_instance(bytes: &[u8]) -> Result<InstanceFile> {
    let obj = parse_root(bytes)?;
    reject_unknown(&obj, "", &INSTANCE_FIELDS)?;
    check_version(&obj)?;
    let n = as_uint(required(&obj, "", "n")?, "/n")? as usize;
    let m = match obj.get("m") {
        Some(v) => as_uint(v, "/m")? as usize,
        None => return Err(perr("/m", "missing required field")),
    };
    let ell = as_uint(required(&obj, "", "ell")?, "/ell")? as usize;
    if n == 0 {
        return Err(Error::input("/n: at least one variable is required"));
    }
    if ell == 0 {
        return Err(Error::input("/ell: matrices must be at least 1×1"));
    }
    let a0 = as_matrix(required(&obj, "", "A0")?, "/A0", ell)?;
    let a = as_matrix_list(required(&obj, "", "A")?, "/A", ell, n)?;
    let b = match obj.get("B") {
        Some(v) => as_matrix_list(v, "/B", ell, m)?,
        None if m == 0 => Vec::new(),
        None => return Err(perr("/B", "missing required field")),
    };
    let interior_point = optional_vector(&obj, "interior_point", n)?;
    let lift_witness = optional_vector(&obj, "lift_witness", m)?;
    let recession_interior_direction = optional_vector(&obj, "recession_interior_direction", n)?;
    Ok(InstanceFile {
        n,
        m,
        ell,
        a0,
        a,
        b,
        interior_point,
        lift_witness,
        recession_interior_direction,
    })
}

fn num(x: f64) -> Value {
    Value::Number(Number::from_f64(x).expect("finite number"))
}

fn vec_value(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

fn matrix_value(m: &SymMatrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vec_value(r)).collect())
}

/// Rebuilds objects with keys inserted in sorted order, so the output is
/// sorted whether or not the map type preserves insertion order.
fn sorted(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            Value::Object(
                keys.into_iter()
                    .map(|k| (k.clone(), sorted(&m[k])))
                    .collect(),
            )
        }
        Value::Array(a) => Value::Array(a.iter().map(sorted).collect()),
        other => other.clone(),
    }
}

/// Compact JSON with sorted keys and a trailing newline.
pub fn canonical_json(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec(&sorted(v)).expect("serializable value");
    out.push(b'\n');
    out
}

pub fn instance_value(f: &InstanceFile) -> Value {
    let mut o = Map::new();
    o.insert("format_version".into(), Value::from(FORMAT_VERSION));
    o.insert("n".into(), Value::from(f.n as u64));
    o.insert("m".into(), Value::from(f.m as u64));
    o.insert("ell".into(), Value::from(f.ell as u64));
    o.insert("A0".into(), matrix_value(&f.a0));
    o.insert(
        "A".into(),
        Value::Array(f.a.iter().map(matrix_value).collect()),
    );
    o.insert(
        "B".into(),
        Value::Array(f.b.iter().map(matrix_value).collect()),
    );
    for (k, v) in [
        ("interior_point", &f.interior_point),
        ("lift_witness", &f.lift_witness),
        (
            "recession_interior_direction",
            &f.recession_interior_direction,
        ),
    ] {
        if let Some(v) = v {
            o.insert(k.into(), vec_value(v));
        }
    }
    Value::Object(o)
}

pub fn write_instance(f: &InstanceFile) -> Vec<u8> {
    canonical_json(&instance_value(f))
}

fn check_unit_rays(rays: &[Vec<f64>], ptr: &str) -> Result<()> {
    for (i, r) in rays.iter().enumerate() {
        let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(perr(
                &format!("{ptr}/{i}"),
                format!("ray norm {n} is not 1"),
            ));
        }
    }
    Ok(())
}

pub fn result_value(r: &ResultFile) -> Value {
    let mut o = Map::new();
    o.insert("format_version".into(), Value::from(FORMAT_VERSION));
    o.insert("algorithm".into(), Value::from(r.algorithm.clone()));
    o.insert("epsilon_requested".into(), num(r.epsilon_requested));
    o.insert("epsilon_certified".into(), num(r.epsilon_certified));
    o.insert("certificate_met".into(), Value::from(r.certificate_met));
    o.insert(
        "inner_rays".into(),
        Value::Array(r.inner_rays.iter().map(|v| vec_value(v)).collect()),
    );
    o.insert(
        "outer_halfspaces".into(),
        Value::Array(
            r.outer_halfspaces
                .iter()
                .map(|h| {
                    let mut m = Map::new();
                    m.insert("normal".into(), vec_value(&h.normal));
                    m.insert("offset".into(), Value::from(0u64));
                    Value::Object(m)
                })
                .collect(),
        ),
    );
    o.insert("iterations".into(), Value::from(r.iterations));
    o.insert("subproblem_count".into(), Value::from(r.subproblem_count));
    o.insert(
        "assumption_report".into(),
        Value::Object(
            r.assumption_report
                .iter()
                .map(|(k, v)| (k.clone(), Value::from(v.clone())))
                .collect(),
        ),
    );
    o.insert("timing_ms".into(), Value::from(r.timing_ms));
    o.insert("partial".into(), Value::from(r.partial));
    o.insert("seed".into(), Value::from(r.seed));
    Value::Object(o)
}

/// Canonical bytes of a result. Rays must be unit-norm.
pub fn write_result(r: &ResultFile) -> Vec<u8> {
    debug_assert!(check_unit_rays(&r.inner_rays, "/inner_rays").is_ok());
    canonical_json(&result_value(r))
}

const RESULT_FIELDS: [&str; 13] = [
    "format_version",
    "algorithm",
    "epsilon_requested",
    "epsilon_certified",
    "certificate_met",
    "inner_rays",
    "outer_halfspaces",
    "iterations",
    "subproblem_count",
    "assumption_report",
    "timing_ms",
    "partial",
    "seed",
];

pub fn parse_result(bytes: &[u8]) -> Result<ResultFile> {
    let obj = parse_root(bytes)?;
    reject_unknown(&obj, "", &RESULT_FIELDS)?;
    check_version(&obj)?;
    let algorithm = required(&obj, "", "algorithm")?
        .as_str()
        .filter(|a| *a == "spectra" || *a == "shadow")
        .ok_or_else(|| perr("/algorithm", "expected \"spectra\" or \"shadow\""))?
        .to_string();
    let real = |k: &str| as_real(required(&obj, "", k)?, &child("", k));
    let uint = |k: &str| as_uint(required(&obj, "", k)?, &child("", k));
    let boolean = |k: &str| as_bool(required(&obj, "", k)?, &child("", k));

    let rays_v = as_array(required(&obj, "", "inner_rays")?, "/inner_rays")?;
    let inner_rays: Vec<Vec<f64>> = rays_v
        .iter()
        .enumerate()
        .map(|(i, r)| as_vector(r, &format!("/inner_rays/{i}")))
        .collect::<Result<_>>()?;
    check_unit_rays(&inner_rays, "/inner_rays")?;

    let hs_v = as_array(required(&obj, "", "outer_halfspaces")?, "/outer_halfspaces")?;
    let mut outer_halfspaces = Vec::with_capacity(hs_v.len());
    for (i, h) in hs_v.iter().enumerate() {
        let ptr = format!("/outer_halfspaces/{i}");
        let h = h
            .as_object()
            .ok_or_else(|| perr(&ptr, "expected an object"))?;
        reject_unknown(h, &ptr, &["normal", "offset"])?;
        let normal = as_vector(required(h, &ptr, "normal")?, &child(&ptr, "normal"))?;
        match required(h, &ptr, "offset")?.as_u64() {
            Some(0) => {}
            _ => {
                return Err(perr(
                    &child(&ptr, "offset"),
                    "outer offsets must be the literal 0",
                ))
            }
        }
        outer_halfspaces.push(OuterHalfspace { normal });
    }

    let report_v = required(&obj, "", "assumption_report")?
        .as_object()
        .ok_or_else(|| perr("/assumption_report", "expected an object"))?;
    let mut assumption_report = BTreeMap::new();
    for (k, v) in report_v {
        let s = v
            .as_str()
            .ok_or_else(|| perr(&child("/assumption_report", k), "expected a string"))?;
        assumption_report.insert(k.clone(), s.to_string());
    }

    Ok(ResultFile {
        algorithm,
        epsilon_requested: real("epsilon_requested")?,
        epsilon_certified: real("epsilon_certified")?,
        certificate_met: boolean("certificate_met")?,
        inner_rays,
        outer_halfspaces,
        iterations: uint("iterations")?,
        subproblem_count: uint("subproblem_count")?,
        assumption_report,
        timing_ms: uint("timing_ms")?,
        partial: boolean("partial")?,
        seed: uint("seed")?,
    })
}
