//! Compare MLP backpropagation with central finite differences.

use puckpar::models::Mlp;
use puckpar::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let h = 1e-6;
    for hidden in [vec![16], vec![32], vec![32, 16]] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut sizes = vec![4];
        sizes.extend(&hidden);
        sizes.push(1);
        let net = Mlp::glorot(&sizes, &mut rng);
        let rows: Vec<[f64; 4]> = (0..16)
            .map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
            .collect();
        let y: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..1.5)).collect();
        let x = Matrix::from_rows(&rows)?;

        let (_, grad) = net.loss_and_gradient(&x, &y)?;
        let analytic = grad.flatten();
        let theta = net.parameters();
        let mut probe = net.clone();
        let mut worst = 0.0_f64;
        for i in 0..theta.len() {
            let mut t = theta.clone();
            t[i] += h;
            probe.set_parameters(&t);
            let up = probe.loss(&x, &y);
            t[i] = theta[i] - h;
            probe.set_parameters(&t);
            let numeric = (up - probe.loss(&x, &y)) / (2.0 * h);
            worst = worst.max((numeric - analytic[i]).abs());
        }
        println!(
            "hidden {hidden:?}: {} parameters, max |backprop - numeric| = {worst:.2e}",
            theta.len()
        );
    }
    Ok(())
}
