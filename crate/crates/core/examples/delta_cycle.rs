//! The trade-off weight keeps its value while the incumbent improves and
//! moves to the next entry of the cycle otherwise.
//!
//! cargo run --example delta_cycle

use gmrs::acquisition::DeltaCycle;

fn main() -> gmrs::Result<()> {
    let mut cycle = DeltaCycle::new(vec![0.95, 0.7, 0.35, 0.0])?;
    let outcomes = [false, true, true, false, false, false, true, false];
    for improved in outcomes {
        let next = cycle.step(improved);
        println!(
            "delta {:.2}  improved {improved:<5} -> {:.2}",
            cycle.delta(),
            next.delta()
        );
        cycle = next;
    }
    Ok(())
}
