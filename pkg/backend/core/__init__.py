# Core module for configuration, errors and two-qubit linear algebra
