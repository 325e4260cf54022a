//! Shows the input-independent Halton visiting order on a small grid.
//!
//! Each cell prints the step (1-based) at which it is visited.

use uncage::halton::halton_order;

fn main() -> uncage::Result<()> {
    let (h, w) = (8, 8);
    let order = halton_order(h, w)?;
    let mut rank = vec![0usize; h * w];
    for (i, p) in order.order.iter().enumerate() {
        rank[p.row * w + p.col] = i + 1;
    }
    for row in rank.chunks(w) {
        let line: Vec<String> = row.iter().map(|r| format!("{r:>3}")).collect();
        println!("{}", line.join(""));
    }
    println!("{} cells from {} sequence draws", order.len(), order.draws);
    println!("2x2 order: {:?}", halton_order(2, 2)?.order);
    Ok(())
}
