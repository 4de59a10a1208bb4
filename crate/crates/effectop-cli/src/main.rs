fn main() {
    println!("effectop");
}
