use std::time::Instant;
use kam_core::suite::*;

#[test]
fn standard_suite_passes_on_seed_42() {
    let t = Instant::now();
    let rep = run_all(42, SuiteSizes::default()).unwrap();
    for s in &rep.suites {
        eprintln!("{} {:?}", s.line(), s.note);
    }
    eprintln!("{:?}", t.elapsed());
    assert!(rep.all_pass);
}
