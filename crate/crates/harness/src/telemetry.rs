//! Per-tick records and their CSV form.

use std::io::Write;
use std::path::Path;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointSample {
    pub desired: f64,
    pub actual: f64,
    pub velocity: f64,
    pub torque: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TelemetryRecord {
    pub t: f64,
    pub com_x: f64,
    pub com_z: f64,
    pub com_vx: f64,
    pub com_vz: f64,
    pub torso_pitch: f64,
    /// In the robot's joint order.
    pub joints: Vec<JointSample>,
    /// Left, right.
    pub contacts: [bool; 2],
    pub step_index: u64,
}

/// Column names for a robot with the given joints.
pub fn header(joint_names: &[String]) -> Vec<String> {
    let mut h: Vec<String> = ["t", "com_x", "com_z", "com_vx", "com_vz", "torso_pitch"].map(String::from).into();
    for name in joint_names {
        for field in ["desired", "actual", "velocity", "torque"] {
            h.push(format!("{name}_{field}"));
        }
    }
    h.extend(["contact_left", "contact_right", "step_index"].map(String::from));
    h
}

/// Formats a float with 9 significant digits in the shortest of fixed or
/// exponent notation, like C's `%.9g`.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl TelemetryRecord {
    pub fn fields(&self) -> Vec<String> {
        let mut f: Vec<String> =
            [self.t, self.com_x, self.com_z, self.com_vx, self.com_vz, self.torso_pitch].map(format_sig9).into();
        for j in &self.joints {
            f.extend([j.desired, j.actual, j.velocity, j.torque].map(format_sig9));
        }
        f.extend(self.contacts.map(|c| u8::from(c).to_string()));
        f.push(self.step_index.to_string());
        f
    }
}

/// Writes a header row followed by one row per record.
pub fn write_csv<W: Write>(out: W, joint_names: &[String], records: &[TelemetryRecord]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(joint_names)).map_err(HarnessError::Csv)?;
    for r in records {
        w.write_record(r.fields()).map_err(HarnessError::Csv)?;
    }
    w.flush().map_err(|e| HarnessError::Csv(e.into()))?;
    Ok(())
}

pub fn write_telemetry(path: &Path, joint_names: &[String], records: &[TelemetryRecord]) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_csv(std::io::BufWriter::new(file), joint_names, records)
}
