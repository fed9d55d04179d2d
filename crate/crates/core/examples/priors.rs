//! Betti priors: the built-in short-axis prior, the text format, and
//! measuring a mask.
//!
//! cargo run --example priors

use mctopo::grid::{Class, LabelMask};
use mctopo::phantom::{generate, PhantomSpec};
use mctopo::priors::{prior_from_mask, short_axis_prior, union_mask, BettiPrior};

fn main() -> mctopo::Result<()> {
    let prior = short_axis_prior();
    println!("{prior}");
    println!("total {} (single labels {})", prior.total(), prior.total_single());

    let text = "\
# a prior that also allows a loop in lv
rv rv 1 0
rv my 1 1
rv lv 2 0
my my 1 1
my lv 1 0
lv lv 1 1
";
    let custom: BettiPrior = text.parse()?;
    println!("differs from the default at {:?}", prior.differences(&custom));

    let (mask, _) = generate(&PhantomSpec::default())?;
    let measured = prior_from_mask(&mask);
    println!("phantom matches the prior: {}", measured == prior);

    let ring = union_mask(&mask, Class::Rv, Class::My);
    println!("rv ∪ my covers {} pixels", ring.count(1));

    let empty = LabelMask::filled(8, 8, 0)?;
    println!("empty mask differs at {:?}", prior.differences(&prior_from_mask(&empty)));
    Ok(())
}
