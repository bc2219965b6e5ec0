//! The scalar associative memory on its own: hard lookups at integer
//! addresses, interpolation at fractional ones, convex writes, soft delete.
//!
//!     cargo run --example associative_memory

use mnc::memory::{attention, key_vector, MemoryConfig, MemoryState};

fn main() -> mnc::Result<()> {
    let cfg = MemoryConfig::new(8);
    println!("capacity {}, tau {}, alpha {}", cfg.capacity, cfg.tau, cfg.alpha);

    // integer addresses give one-hot keys and (after the softmax) exactly
    // hard attention
    println!("key_vector(3)    = {:?}", key_vector(3.0, 8)?);
    println!("attention(3)     = {:?}", attention(3.0, &cfg)?.values());

    // fractional addresses interpolate between the two adjacent cells
    println!("key_vector(2.25) = {:?}", key_vector(2.25, 8)?);
    println!("attention(2.25)  = {:?}", attention(2.25, &cfg)?.values());

    let mut memory = MemoryState::from_values(vec![10.0, 20.0, 30.0, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    println!("memory           = {:?}", memory.as_slice());
    println!("read(1)          = {}", memory.read(1.0, &cfg)?);
    println!("read(0.5)        = {} (midpoint of cells 0 and 1)", memory.read(0.5, &cfg)?);

    memory.write(3.0, 7.0, &cfg)?;
    println!("after write(3,7) = {:?}", memory.as_slice());

    // a fractional write distributes the convex update over both cells
    memory.write(4.5, 8.0, &cfg)?;
    println!("after write(4.5,8) = {:?}", memory.as_slice());

    memory.soft_delete(3.0, &cfg)?;
    println!("after delete(3)  = {:?}", memory.as_slice());

    // at a warmer temperature attention spreads; the default makes it hard
    let warm = MemoryConfig::with(8, 1.0, 1.0)?;
    println!("attention(2.25) at tau=1: {:?}", attention(2.25, &warm)?.values());
    Ok(())
}
