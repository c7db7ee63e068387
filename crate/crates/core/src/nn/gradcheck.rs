use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Gradients, Loss, Network, Target, Tensor};
use crate::Result;

fn loss_at(net: &mut Network, x: &Tensor, target: &Target, loss: Loss, seed: u64) -> Result<f64> {
    // Reseeding replays the same dropout masks on every evaluation.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = net.forward_train(x, &mut rng)?;
    Ok(loss.evaluate(&out.data, target)?.0)
}

/// Central finite differences of the training loss with respect to every parameter.
pub fn finite_difference_gradients(
    net: &Network,
    x: &Tensor,
    target: &Target,
    loss: Loss,
    h: f64,
    mask_seed: u64,
) -> Result<Gradients> {
    let mut probe = net.clone();
    let mut grads = net.zero_gradients();
    let n_tensors = grads.0.len();
    for t in 0..n_tensors {
        for i in 0..grads.0[t].len() {
            let orig = probe.params()[t][i];
            probe.params_mut()[t][i] = orig + h;
            let up = loss_at(&mut probe, x, target, loss, mask_seed)?;
            probe.params_mut()[t][i] = orig - h;
            let down = loss_at(&mut probe, x, target, loss, mask_seed)?;
            probe.params_mut()[t][i] = orig;
            grads.0[t][i] = (up - down) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
