fn main() {
    let (lo, hi) = ctmc_acf::probe();
    println!("{lo} {hi}");
}
