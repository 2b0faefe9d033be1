use oadiff::decomp::{build_network, propagate_base, propagate_full, NetworkMode};
use oadiff::gen::{gen_overlap, DomainStyle, OverlapSample};
use oadiff::instance::Block;
use oadiff::oracle::{bc_oracle, SizeGuard};
use oadiff::VarId;

fn main() {
    let seed: u64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let shape_i: u64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(0);
    let shapes = [(8usize, 8), (6, 10), (9, 7), (5, 5), (4, 12), (10, 6)];
    let (mv, md) = shapes[shape_i as usize];
    let inst = gen_overlap(&OverlapSample {
        max_vars: mv,
        max_values: md,
        style: DomainStyle::Intervals,
        seed: seed.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(shape_i),
    });
    println!("d={} n={}", inst.d(), inst.n_vars());
    for v in 0..inst.n_vars() {
        let dom = inst.domain(VarId(v));
        println!("  X{} {:?} [{},{}]", v + 1, inst.block(VarId(v)), dom.min().unwrap(), dom.max().unwrap());
    }
    let oracle = bc_oracle(&inst, &SizeGuard::default()).unwrap();
    println!("oracle: {:?}", oracle.status);
    if let Some(od) = &oracle.domains {
        for (v, d) in od.iter().enumerate() {
            println!("  oracle X{} [{},{}]", v + 1, d.min().unwrap(), d.max().unwrap());
        }
    }
    let mut net = build_network(&inst, NetworkMode::Full).unwrap();
    let full = propagate_full(&mut net);
    println!("full: {:?}", full.status);
    if full.status == oadiff::instance::PropStatus::Fixpoint {
        for v in 0..inst.n_vars() {
            let iv = net.var_bounds(VarId(v));
            println!("  full X{} [{},{}]", v + 1, iv.lb, iv.ub);
        }
        // dump counters at fixpoint for the shared table
        let d = inst.d();
        println!("shared counters (l,u,lb,ub) with slack<=1:");
        for l in 1..=d {
            for u in l..=d {
                let (clb, cub) = net.counter_bounds(Block::Shared, l, u);
                if cub - clb <= 1 {
                    println!("  [{l},{u}] = [{clb},{cub}]");
                }
            }
        }
    }
}
