//! Chooses, for each user of a cell, between sending the full frame, only
//! the key information, or nothing, under a shared transmit-power budget.

use semtx::scheduler::{brute_force, optimize, SchedulerParams, UserRequest};

fn main() -> semtx::Result<()> {
    let users: Vec<UserRequest> = (0..8)
        .map(|i| UserRequest {
            id: 100 + i,
            d_direct_bits: 3.0 + 0.5 * i as f64,
            d_keyinfo_bits: 1.0 + 0.1 * i as f64,
            noise: 0.5 + 0.2 * (i % 3) as f64,
        })
        .collect();
    let params = SchedulerParams {
        gain: 1.0,
        loss: 0.05,
        deadline_s: 1.0,
        p_max: 40.0,
        alpha: 0.4,
        p_quantum: None,
    };

    let plan = optimize(&users, &params)?;
    println!("user  mode  power     quality");
    for d in &plan.decisions {
        println!("{:4}  {:4}  {:8.3}  {:.1}", d.user_id, d.x.code(), d.power, d.quality);
    }
    println!(
        "total quality {:.2}, total power {:.3} of {}",
        plan.total_quality, plan.total_power, params.p_max
    );
    let check = brute_force(&users, &params)?;
    println!("exhaustive search agrees: {}", check == plan);
    Ok(())
}
