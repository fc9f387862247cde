use super::cell::{step_unchecked, GateTrace};
use super::params::LstmParams;
use crate::error::{Error, Result};
use crate::ingest::Month;
use crate::numerics::{axpy, dot, Matrix};

/// One supervised example: `L` consecutive monthly input rows and the
/// default rate of the window's final month.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// `L x D`, oldest month first.
    pub input: Matrix,
    pub target: f64,
    pub month: Month,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SupervisedWindows {
    pub samples: Vec<Sample>,
}

impl SupervisedWindows {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn all(&self) -> Vec<&Sample> {
        self.samples.iter().collect()
    }
}

/// Runs the cell over the window from zero state and projects the final
/// output: `y = w_y . o_L + b_y`.
pub fn forward(params: &LstmParams, window: &Matrix) -> Result<(f64, Vec<GateTrace>)> {
    if window.rows() == 0 {
        return Err(Error::InvalidArgument("empty input window".into()));
    }
    if window.cols() != params.input_size() {
        return Err(Error::Shape(format!(
            "window has {} features, model expects {}",
            window.cols(),
            params.input_size()
        )));
    }
    Ok(forward_unchecked(params, window))
}

pub(crate) fn forward_unchecked(params: &LstmParams, window: &Matrix) -> (f64, Vec<GateTrace>) {
    let h = params.hidden_size();
    let mut traces: Vec<GateTrace> = Vec::with_capacity(window.rows());
    let mut s = vec![0.0; h];
    let mut c = vec![0.0; h];
    for t in 0..window.rows() {
        let trace = step_unchecked(params, window.row(t).to_vec(), s, c);
        s = trace.o.clone();
        c = trace.c_next.clone();
        traces.push(trace);
    }
    (dot(&params.w_y, &s) + params.b_y, traces)
}

pub fn predict_window(params: &LstmParams, window: &Matrix) -> Result<f64> {
    forward(params, window).map(|(y, _)| y)
}

fn check_batch(params: &LstmParams, batch: &[&Sample]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    for s in batch {
        if s.input.rows() == 0 || s.input.cols() != params.input_size() {
            return Err(Error::Shape(format!(
                "sample for {} is {}x{}, model expects D={}",
                s.month,
                s.input.rows(),
                s.input.cols(),
                params.input_size()
            )));
        }
    }
    Ok(())
}

/// `sqrt(mean((prediction - target)^2))` over the batch.
pub fn loss_rmse(params: &LstmParams, batch: &[&Sample]) -> Result<f64> {
    check_batch(params, batch)?;
    let sse: f64 = batch
        .iter()
        .map(|s| {
            let (y, _) = forward_unchecked(params, &s.input);
            (y - s.target).powi(2)
        })
        .sum();
    Ok((sse / batch.len() as f64).sqrt())
}

/// Loss and exact gradient of [`loss_rmse`] for every parameter, by
/// backpropagation through time. At zero loss the gradient is defined as 0.
pub fn backward(params: &LstmParams, batch: &[&Sample]) -> Result<(f64, LstmParams)> {
    check_batch(params, batch)?;
    let runs: Vec<(f64, Vec<GateTrace>)> = batch.iter().map(|s| forward_unchecked(params, &s.input)).collect();
    let residuals: Vec<f64> = runs.iter().zip(batch).map(|((y, _), s)| y - s.target).collect();
    let n = batch.len() as f64;
    let loss = (residuals.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    let mut grads = LstmParams::zeros(params.hidden_size(), params.input_size());
    if loss == 0.0 {
        return Ok((0.0, grads));
    }
    for ((_, traces), r) in runs.iter().zip(&residuals) {
        // d loss / d y for this sample
        let dy = r / (n * loss);
        accumulate_sample(params, traces, dy, &mut grads);
    }
    Ok((loss, grads))
}

/// Adds one sample's contribution, given `dL/dy`, into `grads`.
pub(crate) fn accumulate_sample(params: &LstmParams, traces: &[GateTrace], dy: f64, grads: &mut LstmParams) {
    let h = params.hidden_size();
    let last = traces.last().expect("nonempty window");
    axpy(dy, &last.o, &mut grads.w_y);
    grads.b_y += dy;

    let mut ds: Vec<f64> = params.w_y.iter().map(|w| w * dy).collect();
    let mut dc = vec![0.0; h];
    let mut da_o = vec![0.0; h];
    let mut da_f = vec![0.0; h];
    let mut da_i = vec![0.0; h];
    let mut da_k = vec![0.0; h];

    for tr in traces.iter().rev() {
        for k in 0..h {
            da_o[k] = ds[k] * tr.o[k] * (1.0 - tr.o[k]);
        }
        // c_{t+1} feeds the output gate through V_o as well as the next step.
        params.v_o.matvec_t_acc(&da_o, &mut dc);
        grads.v_o.add_outer(&da_o, &tr.c_next);
        for k in 0..h {
            da_f[k] = dc[k] * tr.c[k] * tr.f[k] * (1.0 - tr.f[k]);
            da_i[k] = dc[k] * tr.candidate[k] * tr.i[k] * (1.0 - tr.i[k]);
            da_k[k] = dc[k] * tr.i[k] * (1.0 - tr.candidate[k] * tr.candidate[k]);
            dc[k] *= tr.f[k];
        }
        ds.iter_mut().for_each(|v| *v = 0.0);
        for (gate, grad, da) in [
            (&params.forget, &mut grads.forget, &da_f),
            (&params.input, &mut grads.input, &da_i),
            (&params.candidate, &mut grads.candidate, &da_k),
            (&params.output, &mut grads.output, &da_o),
        ] {
            grad.w.add_outer(da, &tr.x);
            grad.u.add_outer(da, &tr.s);
            axpy(1.0, da, &mut grad.b);
            gate.u.matvec_t_acc(da, &mut ds);
        }
    }
}
