use selab::core_model::ProblemSpec;
use selab::elliptic_fd::{newton_solve, FdDomain, SolveOptions};
fn main() {
    for m in [33usize, 65] {
        let spec0 = ProblemSpec::power_on_ball(2, -1.0, 1.0, 1.0).unwrap();
        let dom = FdDomain::build(&spec0, m).unwrap();
        for b in [1.0f64, 0.98, 0.95, 0.92, 0.9, 0.85, 0.8] {
            let spec = ProblemSpec::power_on_ball(2, -1.0, 1.0, b).unwrap();
            let init = dom.to_field(&vec![b; dom.interior_len()], &spec.boundary).unwrap();
            let mut options = SolveOptions::for_boundary(&spec.boundary);
            options.max_outer = 200;
            match newton_solve(&spec, &dom, &init, &options) {
                Ok(f) => {
                    let min = dom.restrict(&f).unwrap().iter().cloned().fold(f64::INFINITY, f64::min);
                    println!("m={m} b={b}: ok min_u={min:.4}");
                }
                Err(e) => println!("m={m} b={b}: {e}"),
            }
        }
    }
}
