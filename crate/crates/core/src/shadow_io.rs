//! Line-delimited JSON storage for shadow records.
//!
//! Each line is one record:
//!
//! ```text
//! {"version":1,"n_qubits":4,"p":0.5,"master_seed":7,"shot_index":0,"initial_state":"ghz",
//!  "layers":[{"kind":"measurement","events":[{"qubit":1,"basis":"Z","outcome":0}]},
//!            {"kind":"unitary","parity":"odd","gates":[["+XZ","-YI","+IX","+ZZ"], …]}]}
//! ```
//!
//! Gates are written as their four Heisenberg images in the order
//! `X⊗I, Z⊗I, I⊗X, I⊗Z`.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::{validate_layers, CircuitLayer, MeasurementEvent, Parity, ShadowRecord};
use crate::clifford::CliffordGate2;
use crate::error::{Error, Result};
use crate::pauli::Basis;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireEvent {
    qubit: usize,
    basis: Basis,
    outcome: u8,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum WireLayer {
    Measurement { events: Vec<WireEvent> },
    Unitary { parity: Parity, gates: Vec<[String; 4]> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireRecord {
    version: u32,
    n_qubits: usize,
    p: f64,
    master_seed: u64,
    shot_index: u64,
    initial_state: String,
    layers: Vec<WireLayer>,
}

fn to_wire(r: &ShadowRecord) -> Result<WireRecord> {
    let layers = r
        .layers
        .iter()
        .map(|l| match l {
            CircuitLayer::Measurement(ev) => ev
                .iter()
                .map(|e| {
                    let outcome = e
                        .outcome
                        .ok_or_else(|| Error::param(format!("qubit {} has no outcome", e.qubit)))?;
                    Ok(WireEvent { qubit: e.qubit, basis: e.basis, outcome })
                })
                .collect::<Result<Vec<_>>>()
                .map(|events| WireLayer::Measurement { events }),
            CircuitLayer::Unitary { parity, gates } => Ok(WireLayer::Unitary {
                parity: *parity,
                gates: gates.iter().map(CliffordGate2::image_labels).collect(),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WireRecord {
        version: FORMAT_VERSION,
        n_qubits: r.n_qubits,
        p: r.p,
        master_seed: r.master_seed,
        shot_index: r.shot_index,
        initial_state: r.initial_state.clone(),
        layers,
    })
}

fn from_wire(w: WireRecord) -> Result<ShadowRecord> {
    if w.version != FORMAT_VERSION {
        return Err(Error::param(format!("unsupported record version {}", w.version)));
    }
    let layers = w
        .layers
        .into_iter()
        .map(|l| match l {
            WireLayer::Measurement { events } => Ok(CircuitLayer::Measurement(
                events
                    .into_iter()
                    .map(|e| MeasurementEvent { qubit: e.qubit, basis: e.basis, outcome: Some(e.outcome) })
                    .collect(),
            )),
            WireLayer::Unitary { parity, gates } => Ok(CircuitLayer::Unitary {
                parity,
                gates: gates.iter().map(|g| CliffordGate2::from_labels(g)).collect::<Result<_>>()?,
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    validate_layers(w.n_qubits, &layers)?;
    if !(0.0..=1.0).contains(&w.p) {
        return Err(Error::param(format!("measurement rate {} outside [0, 1]", w.p)));
    }
    Ok(ShadowRecord {
        n_qubits: w.n_qubits,
        p: w.p,
        master_seed: w.master_seed,
        shot_index: w.shot_index,
        initial_state: w.initial_state,
        layers,
    })
}

/// Serializes one record as a single JSON line (no trailing newline).
pub fn record_to_line(r: &ShadowRecord) -> Result<String> {
    serde_json::to_string(&to_wire(r)?).map_err(|e| Error::param(e.to_string()))
}

/// Parses one line; `line_no` is used for error messages (1-based).
pub fn record_from_line(line: &str, line_no: usize) -> Result<ShadowRecord> {
    let parse = |message: String| Error::Parse { line: line_no, message };
    let wire: WireRecord = serde_json::from_str(line).map_err(|e| parse(e.to_string()))?;
    from_wire(wire).map_err(|e| parse(e.to_string()))
}

pub fn write_records<W: Write>(mut w: W, records: &[ShadowRecord]) -> Result<()> {
    for r in records {
        writeln!(w, "{}", record_to_line(r)?)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads every line that is neither blank nor a `#` comment.
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<ShadowRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(record_from_line(&line, i + 1)?);
    }
    Ok(out)
}

/// Creates or truncates `path`.
pub fn write_shadows(path: impl AsRef<Path>, records: &[ShadowRecord]) -> Result<()> {
    write_records(BufWriter::new(File::create(path)?), records)
}

/// Appends to `path`, creating it when missing.
pub fn append_shadows(path: impl AsRef<Path>, records: &[ShadowRecord]) -> Result<()> {
    let f = OpenOptions::new().create(true).append(true).open(path)?;
    write_records(BufWriter::new(f), records)
}

pub fn read_shadows(path: impl AsRef<Path>) -> Result<Vec<ShadowRecord>> {
    read_records(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{InitialStateSpec, ShadowSampler};

    #[test]
    fn line_roundtrip() {
        let s = ShadowSampler::new(5, 3, 0.37, InitialStateSpec::Ghz).unwrap();
        for i in 0..20 {
            let r = s.shot(u64::MAX - 3, i).unwrap();
            let line = record_to_line(&r).unwrap();
            assert!(!line.contains('\n'));
            assert_eq!(record_from_line(&line, 1).unwrap(), r);
        }
    }

    #[test]
    fn gate_strings_are_three_characters() {
        let s = ShadowSampler::new(4, 1, 0.0, InitialStateSpec::Zero).unwrap();
        let line = record_to_line(&s.shot(0, 0).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        let gates = &v["layers"][1]["gates"];
        assert_eq!(gates.as_array().unwrap().len(), 2);
        for img in gates[0].as_array().unwrap() {
            assert_eq!(img.as_str().unwrap().len(), 3);
        }
    }

    #[test]
    fn malformed_lines_name_the_line() {
        let s = ShadowSampler::new(3, 2, 0.5, InitialStateSpec::Zero).unwrap();
        let good = record_to_line(&s.shot(1, 1).unwrap()).unwrap();
        let text = format!("{good}\n{}\n", &good[..good.len() / 2]);
        match read_records(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(read_records("".as_bytes()).unwrap().is_empty());
        let bad_gate = good.replacen("\"+", "\"*", 1);
        if bad_gate != good {
            assert!(record_from_line(&bad_gate, 1).is_err());
        }
    }
}
