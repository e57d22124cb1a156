use liqgame::lp::{max_transfer, TransferProblem};

fn main() {
    for (a, b) in [(10, 20), (20, 10), (0, 5), (7, 7)] {
        println!("need {a}, holding {b}: transfer {}", max_transfer(TransferProblem::new(a, b)));
    }
}
