fn main() {
    let code = special_generic::pipeline::main_with_args(std::env::args_os());
    std::process::exit(code as i32);
}
