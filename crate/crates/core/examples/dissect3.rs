use oadiff::gen::{gen_overlap, DomainStyle, OverlapSample};
use oadiff::oracle::{sim_hall_check, sim_matching_exists_bf, SizeGuard};
use oadiff::VarId;

fn main() {
    let seed: u64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let inst = gen_overlap(&OverlapSample { max_vars: 9, max_values: 9, style: DomainStyle::Intervals, seed });
    println!("d={} n={}", inst.d(), inst.n_vars());
    for v in 0..inst.n_vars() {
        let dom = inst.domain(VarId(v));
        println!("  X{} {:?} [{},{}]", v + 1, inst.block(VarId(v)), dom.min().unwrap(), dom.max().unwrap());
    }
    let guard = SizeGuard::default();
    let violator = sim_hall_check(&inst, &guard).unwrap();
    let witness = sim_matching_exists_bf(&inst, &guard).unwrap();
    println!("violator: {:?}", violator.map(|p| p.iter().map(|v| v.0 + 1).collect::<Vec<_>>()));
    println!("witness:  {:?}", witness.map(|m| m.edges.iter().map(|(v, x)| (v.0 + 1, *x)).collect::<Vec<_>>()));
}
