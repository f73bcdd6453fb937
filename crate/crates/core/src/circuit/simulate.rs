use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::model::{idx_load_voltage, state_labels, StateModel};
use crate::error::{Error, Result};
use crate::numkernel::expm;
use crate::tolerances::Tolerances;

/// Sampled trajectory with load voltage and stored energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub n: usize,
    /// Charging voltage when the run started from the charged state.
    pub v0: Option<f64>,
    pub transfer_time: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub v_load: Vec<f64>,
    pub energy: Vec<f64>,
}

impl SimTrace {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest relative deviation of the energy from its initial value.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy.first().copied().unwrap_or(0.0);
        let scale = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
        self.energy.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(state_labels(self.n));
        header.push("vL".into());
        header.push("energy".into());
        w.write_record(&header)?;
        for (j, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:.12e}")];
            row.extend(self.states[j].iter().map(|v| format!("{v:.12e}")));
            row.push(format!("{:.12e}", self.v_load[j]));
            row.push(format!("{:.12e}", self.energy[j]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `x(t) = exp(A0 t) x0` on `samples` uniform points of `[0, t_end]`. The
/// last sample is a single exponential at exactly `t_end`.
pub fn simulate_from(model: &StateModel, x0: &[f64], t_end: f64, samples: usize) -> Result<SimTrace> {
    if samples < 2 {
        return Err(Error::InvalidArgument("at least two samples are required".into()));
    }
    if x0.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x0.len(),
        });
    }
    let n = model.n();
    let x0v = DVector::from_column_slice(x0);
    let mut times = Vec::with_capacity(samples);
    let mut states = Vec::with_capacity(samples);
    for j in 0..samples {
        let t = if j + 1 == samples {
            t_end
        } else {
            t_end * j as f64 / (samples - 1) as f64
        };
        let x = if j == 0 { x0v.clone() } else { expm(&model.a0, t)? * &x0v };
        times.push(t);
        states.push(x.as_slice().to_vec());
    }
    let v_load = states.iter().map(|x| n as f64 * x[idx_load_voltage(n)]).collect();
    let energy = states.iter().map(|x| model.energy(x)).collect();
    Ok(SimTrace {
        n,
        v0: None,
        transfer_time: model.transfer_time,
        times,
        states,
        v_load,
        energy,
    })
}

/// Discharge from storage capacitors charged to `v0`, over `[0, T]`.
pub fn simulate(model: &StateModel, v0: f64, samples: usize) -> Result<SimTrace> {
    let mut trace = simulate_from(model, &model.initial_state(v0), model.transfer_time, samples)?;
    trace.v0 = Some(v0);
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    /// `|x(T) - v0 e_{v_{n+1}}|_inf`.
    pub endpoint_residual: f64,
    pub load_voltage: f64,
    /// `v_L(T) / (n v0)`.
    pub load_ratio: f64,
    pub energy_drift: f64,
    pub passed: bool,
}

pub fn verify_transfer(trace: &SimTrace) -> TransferReport {
    verify_transfer_with(trace, &Tolerances::default())
}

pub fn verify_transfer_with(trace: &SimTrace, tol: &Tolerances) -> TransferReport {
    let n = trace.n;
    let v0 = trace.v0.unwrap_or(f64::NAN);
    let end = trace.final_state();
    let endpoint_residual = end
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let want = if i == idx_load_voltage(n) { v0 } else { 0.0 };
            (x - want).abs()
        })
        .fold(0.0, f64::max);
    let endpoint_residual = if v0.is_finite() { endpoint_residual } else { f64::NAN };
    let load_voltage = trace.v_load.last().copied().unwrap_or(f64::NAN);
    let energy_drift = trace.energy_drift();
    TransferReport {
        endpoint_residual,
        load_voltage,
        load_ratio: load_voltage / (n as f64 * v0),
        energy_drift,
        passed: endpoint_residual <= tol.transfer_endpoint && energy_drift <= tol.energy_drift,
    }
}
