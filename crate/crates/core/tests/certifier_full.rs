use stoclot::certify::{certify_partial_bound, PartialParams};
use stoclot::lottery::QDistribution;

/// The fine grid takes far longer than the rest of the suite; run it with
/// `cargo test --release --test certifier_full -- --ignored`.
#[test]
#[ignore]
fn fine_grid_bound() {
    let cert = certify_partial_bound(&PartialParams::new(7, 10, 12, QDistribution::tuned())).expect("certifier");
    println!(
        "bound {:.6}, peak frontier {}, {:.0}s",
        cert.bound, cert.peak_tuples, cert.wall_seconds
    );
    assert!(cert.bound <= 1.593, "bound {}", cert.bound);
}
