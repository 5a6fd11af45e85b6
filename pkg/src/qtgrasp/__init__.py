from .main import app as main
