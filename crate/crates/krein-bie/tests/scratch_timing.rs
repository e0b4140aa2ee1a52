use std::time::Instant;

use num_complex::Complex64;

use krein_bie::geometry::{discretize_curve, CurveParam};
use krein_bie::kernels::KernelConfig;
use krein_bie::layer_ops::assemble_g0sl;

#[test]
#[ignore]
fn profile() {
    // CF iteration count proxy: time k0_k1 on the imaginary axis
    for &x in &[2.1_f64, 4.0, 8.0, 15.0, 30.0] {
        let w = Complex64::new(0.0, -x);
        let n = 2000;
        let t = Instant::now();
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let (k0, _) = krein_bie::kernels::bessel::k0_k1(w).unwrap();
            acc += k0;
        }
        let dt = t.elapsed().as_secs_f64() / n as f64;
        println!("k0_k1(-{x}i): {:.2} us/eval   ({acc:e})", dt * 1e6);
    }
    for &x in &[2.1_f64, 8.0] {
        let w = Complex64::new(x, 0.0);
        let n = 2000;
        let t = Instant::now();
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let (k0, _) = krein_bie::kernels::bessel::k0_k1(w).unwrap();
            acc += k0;
        }
        let dt = t.elapsed().as_secs_f64() / n as f64;
        println!("k0_k1({x}): {:.2} us/eval   ({acc:e})", dt * 1e6);
    }

    let grid = discretize_curve(&CurveParam::Circle { radius: 1.0 }, 256).unwrap();
    let cfg = KernelConfig::new(0.0, Complex64::new(-5.8, 0.0)).unwrap(); // oscillatory
    let t = Instant::now();
    let s = assemble_g0sl(&grid, &cfg).unwrap();
    println!(
        "assemble_g0sl N=256 oscillatory: {:.3} s  (entry sum {:e})",
        t.elapsed().as_secs_f64(),
        s.entries.sum()
    );
    let t = Instant::now();
    let svd = s.entries.clone().svd(false, false);
    println!(
        "svd 256: {:.3} s  (smin {:e})",
        t.elapsed().as_secs_f64(),
        svd.singular_values[255]
    );

    let cfg_d = KernelConfig::new(0.0, Complex64::new(5.8, 0.0)).unwrap(); // decaying
    let t = Instant::now();
    let s = assemble_g0sl(&grid, &cfg_d).unwrap();
    println!(
        "assemble_g0sl N=256 decaying: {:.3} s  (entry sum {:e})",
        t.elapsed().as_secs_f64(),
        s.entries.sum()
    );
}
