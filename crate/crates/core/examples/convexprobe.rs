use oadiff::gen::{gen_overlap, DomainStyle, OverlapSample};
use oadiff::oracle::{sim_hall_check, sim_matching_exists_bf, SizeGuard};

fn main() {
    let guard = SizeGuard::default();
    let mut bad = Vec::new();
    for seed in 0..300_000u64 {
        let inst = gen_overlap(&OverlapSample {
            max_vars: 9,
            max_values: 9,
            style: DomainStyle::Intervals,
            seed,
        });
        let violator = sim_hall_check(&inst, &guard).unwrap();
        let witness = sim_matching_exists_bf(&inst, &guard).unwrap();
        if violator.is_some() != witness.is_none() {
            bad.push(seed);
            if bad.len() > 5 { break; }
        }
    }
    println!("interval-instance mismatches in 300k: {:?}", bad);
}
