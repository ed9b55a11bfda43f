import sys

import config
from main import run

if __name__ == "__main__":
    argv = ["suite"]
    try:
        config.load_config("config.yaml")
        argv += ["--config", "config.yaml"]
    except Exception as e:
        print(f"Warning: Could not load config: {e}")
        print("Running the acceptance suite with built-in defaults")

    sys.exit(run(argv + sys.argv[1:]))
