//! Prints the unmasking schedule and ordering temperature per step.
//!
//! ```text
//! cargo run --example cosine_schedule -- 16 256
//! ```

use uncage::ScheduleConfig;

fn main() -> uncage::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let steps = args.next().unwrap_or(16);
    let tokens = args.next().unwrap_or(256);
    let sched = ScheduleConfig::new(steps, tokens)?;

    println!("{:>4} {:>8} {:>6} {:>8}", "t", "masked", "k_t", "tau");
    for (i, k) in sched.unmask_counts().iter().enumerate() {
        let t = i + 1;
        println!(
            "{t:>4} {:>8} {k:>6} {:>8.4}",
            sched.masked_after(t),
            sched.gumbel_temperature(t)?
        );
    }
    let total: usize = sched.unmask_counts().iter().sum();
    println!("total unmasked: {total} of {tokens}");
    Ok(())
}
