use oadiff::decomp::{build_network, propagate_base, propagate_full, NetworkMode};
use oadiff::gen::{gen_overlap, DomainStyle, OverlapSample};
use oadiff::instance::PropStatus;
use oadiff::oracle::{bc_oracle, SizeGuard};

fn main() {
    let guard = SizeGuard::default();
    let shapes = [(8usize, 8), (6, 10), (9, 7), (5, 5), (4, 12), (10, 6)];
    let mut mismatch = 0u64;
    let mut base_gap = 0u64;
    let mut checked = 0u64;
    let mut failures = 0u64;
    for (si, &(mv, md)) in shapes.iter().enumerate() {
        for seed in 0..25000u64 {
            let inst = gen_overlap(&OverlapSample {
                max_vars: mv,
                max_values: md,
                style: DomainStyle::Intervals,
                seed: seed.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(si as u64),
            });
            let oracle = bc_oracle(&inst, &guard).unwrap();
            if oracle.status == PropStatus::Failure { failures += 1; }
            let mut net = build_network(&inst, NetworkMode::Full).unwrap();
            let full = propagate_full(&mut net);
            checked += 1;

            let mut base_net = build_network(&inst, NetworkMode::Base).unwrap();
            let base = propagate_base(&mut base_net);
            if (base.status == PropStatus::Failure) != (oracle.status == PropStatus::Failure) {
                base_gap += 1;
                if base_gap <= 3 {
                    println!("BASE-GAP shape={si} seed={seed}");
                }
            }
            if full.status != oracle.status {
                mismatch += 1;
                if mismatch <= 6 {
                    println!("STATUS shape={si} seed={seed} full={:?} oracle={:?}", full.status, oracle.status);
                }
                continue;
            }
            if full.status == PropStatus::Fixpoint {
                let fd = full.domains.as_ref().unwrap();
                let od = oracle.domains.as_ref().unwrap();
                for v in 0..inst.n_vars() {
                    if (fd[v].min(), fd[v].max()) != (od[v].min(), od[v].max()) {
                        mismatch += 1;
                        if mismatch <= 6 {
                            println!(
                                "BOUNDS shape={si} seed={seed} var={v} full=[{:?},{:?}] oracle=[{:?},{:?}]",
                                fd[v].min(), fd[v].max(), od[v].min(), od[v].max()
                            );
                        }
                        break;
                    }
                }
            }
        }
    }
    println!("checked={checked} failures={failures} mismatches={mismatch} base_gaps={base_gap}");
}
