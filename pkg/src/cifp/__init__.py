"""cifp: carbon and water footprint estimation for CI/CD workflow runs."""

__version__ = "0.1.0"
