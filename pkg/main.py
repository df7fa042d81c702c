import logging
import os
import sys

# Configurar caminhos
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.cli import main


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO, format="[%(levelname)s] %(message)s")
    sys.exit(main())
