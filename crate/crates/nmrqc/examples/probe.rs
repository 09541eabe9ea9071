use nmrqc::program::parse_program;
use nmrqc::spin::{Role, SpinSystem};
use nmrqc::{pick_peaks, process, run_2d, Acquisition};

fn main() {
    let sys = SpinSystem::new(
        vec![100.0, 420.0, 780.0],
        vec![
            vec![0.0, 16.0, 10.0],
            vec![16.0, 0.0, 6.0],
            vec![10.0, 6.0, 0.0],
        ],
        vec![Role::Observer, Role::Input, Role::Input],
    )
    .unwrap();
    let program = parse_program("pulse I0 90 y\nt1\ngrad\nacquire I0").unwrap();
    for n in [64usize, 128] {
        let acq = Acquisition::defaults_for(&sys, &[0]);
        let raw = run_2d(&sys, &program, n, acq.dwell1, n, acq.dwell2).unwrap();
        let lb = 2.0 / (n as f64 * acq.dwell2);
        let spectrum = process(&raw, 2, lb).unwrap();
        let peaks = pick_peaks(&spectrum, 0.2).unwrap();
        println!("n={n} lb={lb:.2} -> {} peaks", peaks.len());
        for p in &peaks {
            println!("  ({:7.2}, {:7.2})  mag {:.3}", p.f1, p.f2, p.magnitude);
        }
    }
}
