use super::{AutodiffError, Graph, Tensor, Var};
use crate::rng::XorShift64Star;

/// Below this magnitude both gradients are compared absolutely rather than relatively.
const RELATIVE_FLOOR: f64 = 1e-6;

/// `|a - b| / max(|a|, |b|, RELATIVE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

fn scalar_loss<F>(f: &F, inputs: &[Tensor], weights: &mut Option<Vec<f64>>, seed: u64) -> Result<(Graph, Vec<Var>, Var), AutodiffError>
where
    F: Fn(&mut Graph, &[Var]) -> Result<Var, AutodiffError>,
{
    let mut g = Graph::new();
    let vars = inputs.iter().map(|t| g.input(t.clone())).collect::<Result<Vec<_>, _>>()?;
    let out = f(&mut g, &vars)?;
    let n = g.value(out).numel();
    if n == 1 && weights.is_none() {
        return Ok((g, vars, out));
    }
    let w = weights.get_or_insert_with(|| {
        let mut rng = XorShift64Star::substream(seed, "grad_check");
        (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
    });
    let loss = g.weighted_sum(out, w)?;
    Ok((g, vars, loss))
}

/// Largest [`relative_error`] between the analytic gradient of `f` and central differences
/// with step `eps`, over every element of every input.
///
/// Non-scalar outputs are reduced with fixed random weights drawn from `seed`.
pub fn grad_check<F>(inputs: &[Tensor], eps: f64, seed: u64, f: F) -> Result<f64, AutodiffError>
where
    F: Fn(&mut Graph, &[Var]) -> Result<Var, AutodiffError>,
{
    let mut weights = None;
    let (mut g, vars, loss) = scalar_loss(&f, inputs, &mut weights, seed)?;
    g.backward(loss)?;
    let analytic: Vec<Vec<f64>> = vars
        .iter()
        .zip(inputs)
        .map(|(v, t)| g.grad(*v).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; t.numel()]))
        .collect();

    let mut worst = 0.0f64;
    let mut probe = inputs.to_vec();
    for (i, grads) in analytic.iter().enumerate() {
        for (j, a) in grads.iter().enumerate() {
            let x0 = inputs[i].data()[j];
            probe[i].data_mut()[j] = x0 + eps;
            let (g1, _, l1) = scalar_loss(&f, &probe, &mut weights, seed)?;
            probe[i].data_mut()[j] = x0 - eps;
            let (g2, _, l2) = scalar_loss(&f, &probe, &mut weights, seed)?;
            probe[i].data_mut()[j] = x0;
            let numeric = (g1.value(l1).data()[0] - g2.value(l2).data()[0]) / (2.0 * eps);
            worst = worst.max(relative_error(*a, numeric));
        }
    }
    Ok(worst)
}
