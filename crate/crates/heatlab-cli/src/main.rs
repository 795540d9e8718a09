fn main() {
    println!("heatlab");
}
