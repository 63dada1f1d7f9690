fn main() {
    std::process::exit(coupon_cli::run(std::env::args_os()));
}
