from dotenv import load_dotenv

load_dotenv()

from app.cli import cli  # noqa: E402

if __name__ == "__main__":
    # use `uoco ...` after installing, or `python main.py ...` from a checkout
    cli()
