use oadiff::gen::{gen_overlap, DomainStyle, OverlapSample};
use oadiff::oracle::{edge_supported_bf, SizeGuard};
use oadiff::rules::{classify_set, dc_first_pass, SetClassKind};
use oadiff::VarId;

fn main() {
    let seed: u64 = 5826u64.wrapping_mul(6_364_136_223_846_793_005);
    let inst = gen_overlap(&OverlapSample {
        max_vars: 8,
        max_values: 8,
        style: DomainStyle::Intervals,
        seed,
    });
    let guard = SizeGuard::default();
    let n = inst.n_vars();
    println!("unsupported edges by brute force:");
    for v in 0..n {
        for value in inst.domain(VarId(v)).iter() {
            if !edge_supported_bf(&inst, VarId(v), value, &guard).unwrap() {
                println!("  (X{}, {value})", v + 1);
            }
        }
    }
    let pass = dc_first_pass(&inst, &guard).unwrap();
    println!("first-pass removals: {:?}", pass.removals.iter().map(|(v, x)| (v.0 + 1, *x)).collect::<Vec<_>>());
    println!("violator: {:?}", pass.violator);
    println!("tight sets:");
    for mask in 1u32..(1 << n) {
        let p: Vec<VarId> = (0..n).filter(|i| mask & (1 << i) != 0).map(VarId).collect();
        let c = classify_set(&p, &inst);
        if matches!(c.kind, SetClassKind::SimHall | SetClassKind::Violating) {
            println!("  {:?} {:?}", p.iter().map(|v| v.0 + 1).collect::<Vec<_>>(), c.kind);
        }
    }
}
