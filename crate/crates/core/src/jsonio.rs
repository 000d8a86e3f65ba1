//! Canonical JSON input/output for groups, representations,
//! decompositions, channels, frames, and certificate reports.
//!
//! Output is byte-reproducible: object keys are emitted in sorted order
//! and every float is printed in scientific notation with 17 significant
//! digits, so identical inputs, seed, and tolerance give identical bytes.
//! Complex numbers are always [re, im] pairs; matrices are arrays of
//! rows. Loaders re-validate everything they read: group tables go
//! through full construction checks, representations through the
//! homomorphism and unitarity checks, channels through CPTP
//! certification, and stored identity/inverse data is cross-checked
//! against recomputed values when present.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::channel::QuantumChannel;
use crate::decompose::IsotypicDecomposition;
use crate::group::FiniteGroup;
use crate::invariants::{InvariantReport, TensorCheckReport, WitnessCertificate};
use crate::linalg::{self, CMatrix, CVector};
use crate::phase::{EquivalenceReport, Frame, FrameAnalysis, PrCertificate};
use crate::rep::Representation;
use crate::{Result, TwirlError};

/// Serializes with sorted object keys and all floats in scientific
/// notation with 17 significant digits.
pub fn to_canonical_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value);
    out
}

fn write_value(out: &mut String, value: &Value) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                write_float(out, n.as_f64().unwrap_or(f64::NAN));
            }
        }
        Value::String(s) => {
            out.push_str(&Value::String(s.clone()).to_string());
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push(':');
                write_value(out, &map[key.as_str()]);
            }
            out.push('}');
        }
    }
}

fn write_float(out: &mut String, f: f64) {
    if f.is_finite() {
        out.push_str(&format!("{f:.16e}"));
    } else {
        out.push_str("null");
    }
}

pub fn load_json(path: &Path) -> Result<Value> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Writes canonical JSON plus a trailing newline.
pub fn save_canonical(path: &Path, value: &Value) -> Result<()> {
    let mut text = to_canonical_string(value);
    text.push('\n');
    Ok(fs::write(path, text)?)
}

pub fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn complex_from_json(value: &Value) -> Result<Complex64> {
    let pair = value
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| invalid("complex number must be a [re, im] pair"))?;
    let re = pair[0]
        .as_f64()
        .ok_or_else(|| invalid("complex real part must be a number"))?;
    let im = pair[1]
        .as_f64()
        .ok_or_else(|| invalid("complex imaginary part must be a number"))?;
    Ok(Complex64::new(re, im))
}

pub fn vector_to_json(v: &CVector) -> Value {
    Value::Array(v.iter().map(|z| complex_to_json(*z)).collect())
}

pub fn vector_from_json(value: &Value) -> Result<CVector> {
    let entries = value
        .as_array()
        .ok_or_else(|| invalid("vector must be an array"))?;
    if entries.is_empty() {
        return Err(invalid("vector must be nonempty"));
    }
    let parsed: Result<Vec<Complex64>> = entries.iter().map(complex_from_json).collect();
    Ok(CVector::from_vec(parsed?))
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| complex_to_json(m[(i, j)]))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn matrix_from_json(value: &Value) -> Result<CMatrix> {
    let rows = value
        .as_array()
        .ok_or_else(|| invalid("matrix must be an array of rows"))?;
    if rows.is_empty() {
        return Err(invalid("matrix must be nonempty"));
    }
    let mut parsed: Vec<Vec<Complex64>> = Vec::with_capacity(rows.len());
    for row in rows {
        let entries = row
            .as_array()
            .ok_or_else(|| invalid("matrix row must be an array"))?;
        let row: Result<Vec<Complex64>> = entries.iter().map(complex_from_json).collect();
        parsed.push(row?);
    }
    let ncols = parsed[0].len();
    if ncols == 0 || parsed.iter().any(|r| r.len() != ncols) {
        return Err(invalid("matrix rows must be nonempty and equal length"));
    }
    Ok(CMatrix::from_fn(parsed.len(), ncols, |i, j| parsed[i][j]))
}

fn invalid(message: &str) -> TwirlError {
    TwirlError::InvalidInput(message.to_string())
}

fn get<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| invalid(&format!("missing field '{key}'")))
}

fn usize_field(value: &Value, key: &str) -> Result<usize> {
    get(value, key)?
        .as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| invalid(&format!("field '{key}' must be a nonnegative integer")))
}

pub fn group_to_json(group: &FiniteGroup) -> Value {
    let order = group.order();
    json!({
        "labels": group.labels(),
        "table": (0..order).map(|g| group.table_row(g)).collect::<Vec<_>>(),
        "identity": group.identity(),
        "inverses": (0..order).map(|g| group.inverse(g)).collect::<Vec<_>>(),
    })
}

/// Rebuilds the group with full construction validation; any stored
/// identity or inverse data must match the recomputed values.
pub fn group_from_json(value: &Value) -> Result<FiniteGroup> {
    let rows = get(value, "table")?
        .as_array()
        .ok_or_else(|| invalid("group table must be an array of rows"))?;
    let mut table: Vec<Vec<usize>> = Vec::with_capacity(rows.len());
    for row in rows {
        let entries = row
            .as_array()
            .ok_or_else(|| invalid("group table row must be an array"))?;
        let row: Option<Vec<usize>> = entries
            .iter()
            .map(|e| e.as_u64().map(|u| u as usize))
            .collect();
        table.push(row.ok_or_else(|| invalid("group table entries must be indices"))?);
    }
    let labels: Vec<String> = match value.get("labels") {
        Some(v) => {
            let list = v
                .as_array()
                .ok_or_else(|| invalid("labels must be an array"))?;
            list.iter()
                .map(|l| {
                    l.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| invalid("labels must be strings"))
                })
                .collect::<Result<_>>()?
        }
        None => (0..table.len()).map(|i| format!("g{i}")).collect(),
    };
    let group = FiniteGroup::from_cayley_table(labels, table)?;
    if let Some(id) = value.get("identity") {
        let stored = id
            .as_u64()
            .ok_or_else(|| invalid("identity must be an index"))?;
        if stored as usize != group.identity() {
            return Err(TwirlError::InvalidTable(format!(
                "stored identity {stored} but recomputed {}",
                group.identity()
            )));
        }
    }
    if let Some(inv) = value.get("inverses") {
        let stored = inv
            .as_array()
            .ok_or_else(|| invalid("inverses must be an array"))?;
        if stored.len() != group.order() {
            return Err(TwirlError::InvalidTable(
                "inverse list length differs from order".to_string(),
            ));
        }
        for (g, v) in stored.iter().enumerate() {
            let claimed = v
                .as_u64()
                .ok_or_else(|| invalid("inverses must be indices"))?;
            if claimed as usize != group.inverse(g) {
                return Err(TwirlError::InvalidTable(format!(
                    "stored inverse of element {g} is {claimed}, recomputed {}",
                    group.inverse(g)
                )));
            }
        }
    }
    Ok(group)
}

pub fn representation_to_json(rep: &Representation) -> Value {
    json!({
        "group": group_to_json(rep.group()),
        "dim": rep.dim(),
        "matrices": rep.matrices().iter().map(matrix_to_json).collect::<Vec<_>>(),
        "tolerance": rep.tolerance(),
    })
}

/// Loads a representation whose "group" field is either an inline group
/// object or a path (resolved against `base_dir`); construction re-runs
/// the homomorphism and unitarity checks.
pub fn representation_from_json(value: &Value, base_dir: Option<&Path>) -> Result<Representation> {
    let group_field = get(value, "group")?;
    let group = match group_field {
        Value::String(path) => {
            let resolved = match base_dir {
                Some(dir) => dir.join(path),
                None => Path::new(path).to_path_buf(),
            };
            group_from_json(&load_json(&resolved)?)?
        }
        _ => group_from_json(group_field)?,
    };
    let dim = usize_field(value, "dim")?;
    let tolerance = match value.get("tolerance") {
        Some(t) => t
            .as_f64()
            .ok_or_else(|| invalid("tolerance must be a number"))?,
        None => crate::rep::DEFAULT_TOLERANCE,
    };
    let list = get(value, "matrices")?
        .as_array()
        .ok_or_else(|| invalid("matrices must be an array"))?;
    let matrices: Result<Vec<CMatrix>> = list.iter().map(matrix_from_json).collect();
    let matrices = matrices?;
    if matrices.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
        return Err(invalid("matrix shapes disagree with the dim field"));
    }
    let rep = Representation::from_matrices(Arc::new(group), matrices, tolerance)?;
    let check = rep.validate();
    if !check.pass {
        return Err(TwirlError::InvalidRepresentation(format!(
            "loaded matrices fail validation: homomorphism defect {:.3e}, unitarity defect {:.3e}",
            check.homomorphism_defect, check.unitarity_defect
        )));
    }
    Ok(rep)
}

pub fn channel_to_json(phi: &QuantumChannel) -> Value {
    if let Some(kraus) = phi.kraus() {
        json!({
            "in": phi.in_dim(),
            "out": phi.out_dim(),
            "kraus": kraus.iter().map(matrix_to_json).collect::<Vec<_>>(),
        })
    } else {
        json!({
            "in": phi.in_dim(),
            "out": phi.out_dim(),
            "choi": matrix_to_json(&phi.choi_matrix()),
        })
    }
}

/// Loads a channel from its Kraus or Choi form; CPTP certification runs
/// during construction.
pub fn channel_from_json(value: &Value, tolerance: f64) -> Result<QuantumChannel> {
    let in_dim = usize_field(value, "in")?;
    let out_dim = usize_field(value, "out")?;
    if let Some(kraus_field) = value.get("kraus") {
        let list = kraus_field
            .as_array()
            .ok_or_else(|| invalid("kraus must be an array of matrices"))?;
        let kraus: Result<Vec<CMatrix>> = list.iter().map(matrix_from_json).collect();
        let kraus = kraus?;
        if kraus
            .iter()
            .any(|k| k.nrows() != out_dim || k.ncols() != in_dim)
        {
            return Err(invalid("Kraus shapes disagree with in/out fields"));
        }
        QuantumChannel::from_kraus(kraus, tolerance)
    } else if let Some(choi_field) = value.get("choi") {
        QuantumChannel::from_choi(matrix_from_json(choi_field)?, in_dim, out_dim, tolerance)
    } else {
        Err(invalid("channel needs a 'kraus' or 'choi' field"))
    }
}

pub fn decomposition_to_json(dec: &IsotypicDecomposition) -> Value {
    let types: Vec<Value> = dec
        .types
        .iter()
        .map(|t| {
            json!({
                "n": t.dim(),
                "character": t
                    .matrices()
                    .iter()
                    .map(|m| complex_to_json(linalg::trace(m)))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "d": dec.d,
        "m": dec.multiplicities,
        "n": dec.dimensions,
        "U": matrix_to_json(&dec.u),
        "types": types,
    })
}

pub fn frame_to_json(frame: &Frame) -> Value {
    json!({
        "n": frame.n(),
        "vectors": frame.vectors().iter().map(vector_to_json).collect::<Vec<_>>(),
    })
}

pub fn frame_from_json(value: &Value) -> Result<Frame> {
    let n = usize_field(value, "n")?;
    let list = get(value, "vectors")?
        .as_array()
        .ok_or_else(|| invalid("vectors must be an array"))?;
    let vectors: Result<Vec<CVector>> = list.iter().map(vector_from_json).collect();
    let vectors = vectors?;
    if vectors.iter().any(|v| v.len() != n) {
        return Err(invalid("vector lengths disagree with the n field"));
    }
    Frame::new(vectors)
}

pub fn frame_analysis_to_json(report: &FrameAnalysis) -> Value {
    json!({
        "lower_bound": report.lower_bound,
        "upper_bound": report.upper_bound,
        "is_frame": report.is_frame,
        "is_parseval": report.is_parseval,
        "parseval_vectors": report
            .parseval_vectors
            .as_ref()
            .map(|vs| Value::Array(vs.iter().map(vector_to_json).collect()))
            .unwrap_or(Value::Null),
    })
}

fn residuals_to_json(residuals: &std::collections::BTreeMap<String, f64>) -> Value {
    Value::Object(
        residuals
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect(),
    )
}

pub fn witness_to_json(witness: &WitnessCertificate) -> Value {
    json!({
        "kind": witness.kind.as_str(),
        "pass": witness.pass,
        "threshold": witness.threshold,
        "residuals": residuals_to_json(&witness.residuals),
        "vectors": witness.vectors.iter().map(vector_to_json).collect::<Vec<_>>(),
        "projection": witness
            .projection
            .as_ref()
            .map(matrix_to_json)
            .unwrap_or(Value::Null),
        "kl_matrix": witness
            .kl_matrix
            .as_ref()
            .map(matrix_to_json)
            .unwrap_or(Value::Null),
    })
}

pub fn invariant_report_to_json(report: &InvariantReport) -> Value {
    let mut residuals = serde_json::Map::new();
    for witness in [
        &report.alpha_witness,
        &report.code_witness,
        &report.gamma_witness,
        &report.tau_witness,
    ] {
        residuals.insert(
            witness.kind.as_str().to_string(),
            json!(witness.worst_residual()),
        );
    }
    json!({
        "alpha": report.alpha,
        "beta": report.beta,
        "gamma": report.gamma,
        "tau": report.tau,
        "capacity_bits": report.capacity_bits,
        "witnesses": {
            "independent-set": witness_to_json(&report.alpha_witness),
            "code-subspace": witness_to_json(&report.code_witness),
            "orthogonal-family": witness_to_json(&report.gamma_witness),
            "tau-subspace": witness_to_json(&report.tau_witness),
        },
        "residuals": Value::Object(residuals),
        "decomposition": {
            "d": report.decomposition.d,
            "m": report.decomposition.multiplicities,
            "n": report.decomposition.dimensions,
        },
    })
}

pub fn tensor_check_to_json(report: &TensorCheckReport) -> Value {
    json!({
        "copies": report.copies,
        "base_alpha": report.base_alpha,
        "tensor_alpha": report.tensor_alpha,
        "expected_alpha": report.expected_alpha,
        "base_types": report.base_types,
        "tensor_types": report.tensor_types,
        "expected_types": report.expected_types,
        "multiplicities_match": report.multiplicities_match,
        "pass": report.pass,
    })
}

pub fn pr_certificate_to_json(cert: &PrCertificate) -> Value {
    json!({
        "verdict": cert.verdict.as_str(),
        "kernel_dim": cert.kernel_dim.map(|d| json!(d)).unwrap_or(Value::Null),
        "counterexample": cert
            .counterexample
            .as_ref()
            .map(|(x, y)| json!({"x": vector_to_json(x), "y": vector_to_json(y)}))
            .unwrap_or(Value::Null),
        "evaluations": cert.evaluations,
        "restarts_used": cert.restarts_used,
        "exact": cert.exact,
        "subspace": cert
            .subspace
            .as_ref()
            .map(|vs| Value::Array(vs.iter().map(vector_to_json).collect()))
            .unwrap_or(Value::Null),
        "residuals": residuals_to_json(&cert.residuals),
    })
}

pub fn equivalence_report_to_json(report: &EquivalenceReport) -> Value {
    json!({
        "agree": report.agree,
        "kernel_mismatch": report.kernel_mismatch,
        "channel_side": pr_certificate_to_json(&report.channel_side),
        "measurement_side": pr_certificate_to_json(&report.measurement_side),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::isotypic_decomposition;
    use crate::invariants::full_report;
    use crate::seeding::child_rng;

    fn s3_regular() -> Representation {
        Representation::regular(Arc::new(FiniteGroup::symmetric(3).unwrap())).unwrap()
    }

    #[test]
    fn canonical_floats_and_key_order() {
        let value = json!({"zeta": 0.5, "alpha": 1, "mid": [true, Value::Null, "a\"b"]});
        assert_eq!(
            to_canonical_string(&value),
            r#"{"alpha":1,"mid":[true,null,"a\"b"],"zeta":5.0000000000000000e-1}"#
        );
    }

    #[test]
    fn group_roundtrip_and_crosschecks() {
        let group = FiniteGroup::symmetric(3).unwrap();
        let value = group_to_json(&group);
        let loaded = group_from_json(&value).unwrap();
        assert_eq!(loaded.order(), 6);
        assert_eq!(loaded.labels(), group.labels());
        for g in 0..6 {
            assert_eq!(loaded.table_row(g), group.table_row(g));
        }

        let mut tampered = value.clone();
        tampered["identity"] = json!(3);
        assert!(matches!(
            group_from_json(&tampered),
            Err(TwirlError::InvalidTable(_))
        ));

        let mut bad_inverse = value;
        bad_inverse["inverses"][1] = json!(0);
        assert!(matches!(
            group_from_json(&bad_inverse),
            Err(TwirlError::InvalidTable(_))
        ));
    }

    #[test]
    fn group_load_rejects_non_associative_table() {
        // 2x2 "table" where (0·1)·1 = 0 but 0·(1·1) = 1.
        let value = json!({"labels": ["e", "a"], "table": [[0, 1], [1, 1]]});
        assert!(group_from_json(&value).is_err());
    }

    #[test]
    fn representation_roundtrip_revalidates() {
        let rep = s3_regular();
        let value = representation_to_json(&rep);
        let loaded = representation_from_json(&value, None).unwrap();
        assert_eq!(loaded.dim(), 6);
        for g in 0..6 {
            assert!(linalg::fro_norm(&(loaded.matrix(g) - rep.matrix(g))) < 1e-14);
        }

        let mut corrupt = value;
        corrupt["matrices"][1][0][0] = json!([1e-3, 0.0]);
        assert!(representation_from_json(&corrupt, None).is_err());
    }

    #[test]
    fn representation_group_by_path() {
        let dir = std::env::temp_dir().join(format!("twirl-jsonio-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let group = FiniteGroup::cyclic(3).unwrap();
        save_canonical(&dir.join("group.json"), &group_to_json(&group)).unwrap();
        let rep = Representation::regular(Arc::new(group)).unwrap();
        let mut value = representation_to_json(&rep);
        value["group"] = json!("group.json");
        let loaded = representation_from_json(&value, Some(&dir)).unwrap();
        assert_eq!(loaded.dim(), 3);
        assert_eq!(loaded.group().order(), 3);
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn channel_roundtrip_kraus_and_choi() {
        let mut rng = child_rng(4, "channel-roundtrip");
        let u = linalg::random_unitary(&mut rng, 3);
        let p0 = linalg::identity(3).scale(0.5_f64.sqrt());
        let k1 = (&u * &p0).scale(1.0);
        let phi = QuantumChannel::from_kraus(vec![p0, k1], 1e-9).unwrap();
        let value = channel_to_json(&phi);
        let loaded = channel_from_json(&value, 1e-9).unwrap();
        assert!(linalg::fro_norm(&(loaded.choi_matrix() - phi.choi_matrix())) < 1e-12);

        let choi_only =
            QuantumChannel::from_choi(phi.choi_matrix(), 3, 3, 1e-9).unwrap();
        let choi_value = channel_to_json(&choi_only);
        assert!(choi_value.get("choi").is_some());
        let reloaded = channel_from_json(&choi_value, 1e-9).unwrap();
        assert!(linalg::fro_norm(&(reloaded.choi_matrix() - phi.choi_matrix())) < 1e-10);
    }

    #[test]
    fn frame_roundtrip() {
        let mut rng = child_rng(9, "frame-roundtrip");
        let frame = Frame::new(
            (0..4)
                .map(|_| linalg::random_unit_vector(&mut rng, 2))
                .collect(),
        )
        .unwrap();
        let value = frame_to_json(&frame);
        let loaded = frame_from_json(&value).unwrap();
        assert_eq!(loaded.n(), 2);
        for (a, b) in frame.vectors().iter().zip(loaded.vectors()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn decomposition_json_shape() {
        let rep = s3_regular();
        let dec = isotypic_decomposition(&rep, 0).unwrap();
        let value = decomposition_to_json(&dec);
        assert_eq!(value["d"], json!(3));
        let m: Vec<u64> = value["m"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        let n: Vec<u64> = value["n"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        assert_eq!(m, n);
        let mut sorted = m.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 1, 2]);
        assert_eq!(value["U"].as_array().unwrap().len(), 6);
        assert_eq!(value["types"].as_array().unwrap().len(), 3);
        for t in value["types"].as_array().unwrap() {
            assert_eq!(t["character"].as_array().unwrap().len(), 6);
        }
    }

    #[test]
    fn full_report_json_is_deterministic() {
        let rep = s3_regular();
        let a = to_canonical_string(&invariant_report_to_json(
            &full_report(&rep, 0).unwrap(),
        ));
        let b = to_canonical_string(&invariant_report_to_json(
            &full_report(&rep, 0).unwrap(),
        ));
        assert_eq!(a, b);
        assert!(a.contains(r#""alpha":4"#));
        assert!(a.contains(r#""capacity_bits":2.0000000000000000e0"#));
    }
}
