//! Compile a finite function on integer keys into a lookup network: exact on
//! every listed key, zero everywhere else, conflicts rejected.
//!
//!     cargo run --example table_lookup

use mnc::network::{Network, TableEntry};

fn main() -> mnc::Result<()> {
    // a small two-key function
    let entries = vec![
        TableEntry { key: vec![0, 0], value: vec![5.0] },
        TableEntry { key: vec![1, 0], value: vec![7.0] },
        TableEntry { key: vec![2, 3], value: vec![-1.5] },
    ];
    let net = Network::table(&entries, 2, 1)?;
    println!(
        "network shape: {} -> {}, {} layers ({} bump units)",
        net.input_dim(),
        net.output_dim(),
        net.layers().len(),
        net.layers()[1].rows()
    );
    for key in [[0.0, 0.0], [1.0, 0.0], [2.0, 3.0], [9.0, 9.0], [1.0, 1.0]] {
        println!("table{key:?} = {:?}", net.eval(&key)?);
    }

    // the same mechanism compiles a whole transition function
    let mut successor = Vec::new();
    for state in 0..10i64 {
        successor.push(TableEntry {
            key: vec![state],
            value: vec![((state * state + 1) % 10) as f64],
        });
    }
    let step = Network::table(&successor, 1, 1)?;
    let mut state = 3.0;
    print!("orbit of 3 under s -> (s^2 + 1) mod 10:");
    for _ in 0..6 {
        print!(" {state}");
        state = step.eval(&[state])?[0];
    }
    println!();

    // a key mapped to two distinct outputs is a compile-time conflict
    let conflicting = vec![
        TableEntry { key: vec![4], value: vec![1.0] },
        TableEntry { key: vec![4], value: vec![2.0] },
    ];
    match Network::table(&conflicting, 1, 1) {
        Err(err) => println!("conflict rejected: {err}"),
        Ok(_) => unreachable!("conflicting tables must not compile"),
    }
    Ok(())
}
