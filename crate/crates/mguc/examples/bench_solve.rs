use std::io::Write;
use std::path::Path;
use std::time::Instant;

fn main() {
    let case = mguc::io::load_case(Path::new("data/paper_case/case.json")).unwrap();
    let mip = mguc::build_uc_mip(&case, mguc::UcMode::Euc, mguc::PwlConfig { segments: 64 }).unwrap();
    println!("{} cols x {} rows", mip.instance.num_cols(), mip.instance.num_rows());
    std::io::stdout().flush().unwrap();
    for limit in [5000usize, 20000, 80000] {
        let opts = mguc::simplex::LpOptions { max_iterations: limit, ..Default::default() };
        let t0 = Instant::now();
        match mguc::simplex::solve_lp(&mip.instance, &[], &opts) {
            Ok(r) => { println!("limit {limit}: DONE {:?} obj {} iters {} in {:?}", r.status, r.objective, r.iterations, t0.elapsed()); break; }
            Err(e) => println!("limit {limit}: {e} in {:?}", t0.elapsed()),
        }
        std::io::stdout().flush().unwrap();
    }
}
