use cohq_core::diamond::diamond_measure;
use cohq_core::nsid::nsid_measure;
use cohq_core::quantum::{mix, Channel};
use ndarray::array;
use num_complex::Complex64;
use std::time::Instant;

fn lambda_base() -> Channel {
    let h = 0.5f64; // 1/sqrt(4)
    let c = |x: f64| Complex64::new(x * h, 0.0);
    let k1 = array![[c(-1.0), c(1.0), c(0.0)], [c(0.0), c(0.0), c(0.0)], [c(1.0), c(1.0), c(0.0)]];
    let k2 = array![[c(1.0), c(0.0), c(-1.0)], [c(1.0), c(0.0), c(1.0)], [c(0.0), c(0.0), c(0.0)]];
    let k3 = array![[c(0.0), c(-1.0), c(1.0)], [c(0.0), c(0.0), c(0.0)], [c(0.0), c(1.0), c(1.0)]];
    Channel::new(3, 3, vec![k1, k2, k3]).unwrap()
}

fn main() {
    for p in [0.25f64, 0.5, 0.75, 1.0] {
        let lam = mix(p, &lambda_base(), &Channel::dephasing(3)).unwrap();
        let t0 = Instant::now();
        let rn = nsid_measure(&lam, 1e-4, 50).unwrap();
        let tn = t0.elapsed();
        let t1 = Instant::now();
        let rd = diamond_measure(&lam, 1e-8).unwrap();
        let td = t1.elapsed();
        println!(
            "lambda({p}): nsid = {:.6} [l {:.6}, u {:.6}] ({} iters, {tn:?}, conv {}), diamond = {:.6} ({td:?}), M_d - M_n = {:.6}",
            rn.value, rn.lower, rn.upper, rn.iterations, rn.converged, rd.value, rd.value - rn.value
        );
    }
}
