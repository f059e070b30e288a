use rand::RngCore;

use super::ModelParams;
use crate::nn::{
    conv1d_backward_into, conv1d_forward_into, dropout_mask, fc_backward_into, fc_forward_into,
    log_softmax_in_place, maxpool1d_backward_into, maxpool1d_into, relu_backward_in_place, relu_in_place,
    DenseVector, FeatureMap, GradientSet, Tensor,
};
use crate::{Error, Result};

/// Inference batches are chunked to bound activation memory.
const EVAL_CHUNK: usize = 256;

struct HeadActivations {
    input: Vec<f64>,
    a1: Vec<f64>,
    p1: Vec<f64>,
    idx1: Vec<usize>,
    a2: Vec<f64>,
    p2: Vec<f64>,
    idx2: Vec<usize>,
}

struct Activations {
    batch: usize,
    heads: Vec<HeadActivations>,
    z: Vec<f64>,
    h1: Vec<f64>,
    mask1: Option<Vec<f64>>,
    d1: Vec<f64>,
    h2: Vec<f64>,
    mask2: Option<Vec<f64>>,
    d2: Vec<f64>,
    log_probs: Vec<f64>,
}

fn check_inputs(params: &ModelParams, inputs: &[&FeatureMap]) -> Result<()> {
    let cfg = &params.config;
    for x in inputs {
        if x.channels() != cfg.input_channels || x.length() != cfg.window_len {
            return Err(Error::config(format!(
                "model expects {}×{} windows, got {}×{}",
                cfg.input_channels,
                cfg.window_len,
                x.channels(),
                x.length()
            )));
        }
    }
    Ok(())
}

fn apply_dropout<R: RngCore + ?Sized>(values: &[f64], rate: f64, rng: Option<&mut R>) -> (Vec<f64>, Option<Vec<f64>>) {
    match rng {
        Some(rng) if rate > 0.0 => {
            let mask = dropout_mask(values.len(), rate, rng);
            let out = values.iter().zip(&mask).map(|(v, m)| v * m).collect();
            (out, Some(mask))
        }
        _ => (values.to_vec(), None),
    }
}

fn run_forward(params: &ModelParams, inputs: &[&FeatureMap], mut rng: Option<&mut dyn RngCore>) -> Result<Activations> {
    check_inputs(params, inputs)?;
    let cfg = &params.config;
    let batch = inputs.len();
    let head_channels = cfg.head_channels()?;
    let lens = cfg.stage_lengths()?;
    let [c1, c2] = cfg.conv_channels;
    let head_dim = c2 * lens.pool2;
    let flat = head_dim * cfg.heads();
    let mut cols = Vec::new();

    let mut heads = Vec::with_capacity(cfg.heads());
    for h in 0..cfg.heads() {
        let (conv1, conv2) = params.head(h);
        let span = head_channels * cfg.window_len;
        let mut input = Vec::with_capacity(batch * span);
        for x in inputs {
            input.extend_from_slice(&x.values()[h * span..(h + 1) * span]);
        }
        let mut a1 = vec![0.0; batch * c1 * lens.conv1];
        conv1d_forward_into(conv1, &input, batch, cfg.window_len, &mut a1, &mut cols);
        relu_in_place(&mut a1);
        let mut p1 = vec![0.0; batch * c1 * lens.pool1];
        let mut idx1 = vec![0; p1.len()];
        maxpool1d_into(&a1, batch, c1, lens.conv1, cfg.pool_size, &mut p1, &mut idx1);

        let mut a2 = vec![0.0; batch * c2 * lens.conv2];
        conv1d_forward_into(conv2, &p1, batch, lens.pool1, &mut a2, &mut cols);
        relu_in_place(&mut a2);
        let mut p2 = vec![0.0; batch * head_dim];
        let mut idx2 = vec![0; p2.len()];
        maxpool1d_into(&a2, batch, c2, lens.conv2, cfg.pool_size, &mut p2, &mut idx2);
        heads.push(HeadActivations { input, a1, p1, idx1, a2, p2, idx2 });
    }

    let mut z = vec![0.0; batch * flat];
    for b in 0..batch {
        for (h, head) in heads.iter().enumerate() {
            z[b * flat + h * head_dim..b * flat + (h + 1) * head_dim]
                .copy_from_slice(&head.p2[b * head_dim..(b + 1) * head_dim]);
        }
    }

    let off = params.dense_offset();
    let [f1, f2] = cfg.fc_sizes;
    let mut h1 = vec![0.0; batch * f1];
    fc_forward_into(&params.layers[off], &z, batch, &mut h1);
    relu_in_place(&mut h1);
    let (d1, mask1) = apply_dropout(&h1, cfg.dropout_rate, rng.as_deref_mut());

    let mut h2 = vec![0.0; batch * f2];
    fc_forward_into(&params.layers[off + 1], &d1, batch, &mut h2);
    relu_in_place(&mut h2);
    let (d2, mask2) = apply_dropout(&h2, cfg.dropout_rate, rng.as_deref_mut());

    let mut log_probs = vec![0.0; batch * cfg.num_classes];
    fc_forward_into(&params.layers[off + 2], &d2, batch, &mut log_probs);
    for row in log_probs.chunks_exact_mut(cfg.num_classes) {
        log_softmax_in_place(row);
    }

    Ok(Activations { batch, heads, z, h1, mask1, d1, h2, mask2, d2, log_probs })
}

fn run_backward(params: &ModelParams, acts: &Activations, targets: &[usize]) -> GradientSet {
    let cfg = &params.config;
    let batch = acts.batch;
    let n = cfg.num_classes;
    let lens = cfg.stage_lengths().expect("validated in forward");
    let [c1, c2] = cfg.conv_channels;
    let [f1, f2] = cfg.fc_sizes;
    let head_dim = c2 * lens.pool2;
    let flat = head_dim * cfg.heads();
    let off = params.dense_offset();
    let mut grads = params.zero_gradients();
    let mut cols = Vec::new();

    // d(mean NLL)/d logits = (softmax − one_hot) / batch
    let scale = 1.0 / batch as f64;
    let mut g_logits: Vec<f64> = acts.log_probs.iter().map(|lp| lp.exp() * scale).collect();
    for (b, &t) in targets.iter().enumerate() {
        g_logits[b * n + t] -= scale;
    }

    let mut g2 = vec![0.0; batch * f2];
    fc_backward_into(&params.layers[off + 2], &acts.d2, batch, &g_logits, &mut grads.layers[off + 2], Some(&mut g2));
    if let Some(mask) = &acts.mask2 {
        g2.iter_mut().zip(mask).for_each(|(g, m)| *g *= m);
    }
    relu_backward_in_place(&acts.h2, &mut g2);

    let mut g1 = vec![0.0; batch * f1];
    fc_backward_into(&params.layers[off + 1], &acts.d1, batch, &g2, &mut grads.layers[off + 1], Some(&mut g1));
    if let Some(mask) = &acts.mask1 {
        g1.iter_mut().zip(mask).for_each(|(g, m)| *g *= m);
    }
    relu_backward_in_place(&acts.h1, &mut g1);

    let mut gz = vec![0.0; batch * flat];
    fc_backward_into(&params.layers[off], &acts.z, batch, &g1, &mut grads.layers[off], Some(&mut gz));

    for (h, head) in acts.heads.iter().enumerate() {
        let (conv1, conv2) = params.head(h);
        let mut gp2 = Vec::with_capacity(batch * head_dim);
        for b in 0..batch {
            gp2.extend_from_slice(&gz[b * flat + h * head_dim..b * flat + (h + 1) * head_dim]);
        }
        let mut ga2 = vec![0.0; head.a2.len()];
        maxpool1d_backward_into(&head.idx2, batch, &gp2, &mut ga2);
        relu_backward_in_place(&head.a2, &mut ga2);

        let mut gp1 = vec![0.0; head.p1.len()];
        let (lo, hi) = grads.layers.split_at_mut(2 * h + 1);
        conv1d_backward_into(conv2, &head.p1, batch, lens.pool1, &ga2, &mut hi[0], Some(&mut gp1), &mut cols);

        let mut ga1 = vec![0.0; batch * c1 * lens.conv1];
        maxpool1d_backward_into(&head.idx1, batch, &gp1, &mut ga1);
        relu_backward_in_place(&head.a1, &mut ga1);
        conv1d_backward_into(conv1, &head.input, batch, cfg.window_len, &ga1, &mut lo[2 * h], None, &mut cols);
    }
    grads
}

fn split_rows(log_probs: Vec<f64>, n: usize) -> Vec<DenseVector> {
    log_probs.chunks_exact(n).map(|r| DenseVector::new(r.to_vec())).collect()
}

/// Log-probabilities for one window. With `training` the dropout masks are
/// drawn from `rng`; otherwise `rng` is untouched and the result is a pure
/// function of `(params, window)`.
pub fn forward(params: &ModelParams, window: &FeatureMap, training: bool, rng: &mut dyn RngCore) -> Result<DenseVector> {
    let acts = run_forward(params, &[window], training.then_some(rng))?;
    Ok(DenseVector::new(acts.log_probs))
}

/// Inference-mode log-probabilities for many windows.
pub fn forward_batch(params: &ModelParams, inputs: &[&FeatureMap]) -> Result<Vec<DenseVector>> {
    let mut out = Vec::with_capacity(inputs.len());
    for chunk in inputs.chunks(EVAL_CHUNK) {
        let acts = run_forward(params, chunk, None)?;
        out.extend(split_rows(acts.log_probs, params.config.num_classes));
    }
    Ok(out)
}

/// Mean NLL over the batch and its gradient. Dropout is active iff `rng` is given.
pub fn loss_and_gradient(
    params: &ModelParams,
    inputs: &[&FeatureMap],
    targets: &[usize],
    rng: Option<&mut dyn RngCore>,
) -> Result<(f64, GradientSet)> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::Input(format!("{} inputs with {} targets", inputs.len(), targets.len())));
    }
    let n = params.config.num_classes;
    if let Some(&t) = targets.iter().find(|&&t| t >= n) {
        return Err(Error::Input(format!("target class {t} out of range for {n} classes")));
    }
    let acts = run_forward(params, inputs, rng)?;
    let loss = targets.iter().enumerate().map(|(b, &t)| -acts.log_probs[b * n + t]).sum::<f64>() / inputs.len() as f64;
    let grads = run_backward(params, &acts, targets);
    Ok((loss, grads))
}

/// Full-network gradient of the NLL for one window, without dropout.
pub fn backward(params: &ModelParams, window: &FeatureMap, target: usize) -> Result<GradientSet> {
    loss_and_gradient(params, &[window], &[target], None).map(|(_, g)| g)
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub fn predict(params: &ModelParams, window: &FeatureMap) -> Result<usize> {
    let acts = run_forward(params, &[window], None)?;
    Ok(argmax(&acts.log_probs))
}

pub fn predict_batch(params: &ModelParams, inputs: &[&FeatureMap]) -> Result<Vec<usize>> {
    Ok(forward_batch(params, inputs)?.iter().map(|lp| argmax(lp.values())).collect())
}
