fn main() {
    // Thin CLI shell; filled in with the harness commands.
    eprintln!("blap: harness not wired yet");
    std::process::exit(2);
}
