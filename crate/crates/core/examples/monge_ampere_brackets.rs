//! Monge-Ampere brackets on the unit disk. With one argument clamped, the
//! three cyclic integrals agree; with an affine trace, two arguments swap.

use defect_equilibrium::field::Polynomial;
use defect_equilibrium::verification::{monge_ampere_pair_swap, monge_ampere_symmetry_check, Disk};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> defect_equilibrium::Result<()> {
    let disk = Disk { center: [0.0, 0.0], radius: 1.0 };
    let bump = Polynomial::new([((0, 0), 1.0), ((2, 0), -1.0), ((0, 2), -1.0)]);
    let clamp = &bump * &bump;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let xi = &clamp * &Polynomial::random(2, &mut rng);
        let (eta, chi) = (Polynomial::random(3, &mut rng), Polynomial::random(3, &mut rng));
        let r = monge_ampere_symmetry_check(&xi, &eta, &chi, &disk)?;
        let [a, b, c] = r.integrals;
        println!("cyclic {a:+.10e} {b:+.10e} {c:+.10e}  max gap {:.1e}", r.discrepancies.iter().cloned().fold(0.0, f64::max));
        let affine = &Polynomial::random(1, &mut rng) + &clamp;
        let [a, b] = monge_ampere_pair_swap(&affine, &eta, &chi, &disk)?;
        println!("swap   {a:+.10e} {b:+.10e}");
    }
    // the swap needs an affine trace, so a bump alone is refused
    println!("non-affine gradient trace rejected: {}", monge_ampere_pair_swap(&bump, &clamp, &clamp, &disk).is_err());
    Ok(())
}
