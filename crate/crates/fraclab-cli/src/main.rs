fn main() {
    println!("fraclab");
}
