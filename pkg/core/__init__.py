"""SSPMPRK integrators for positive conservative production-destruction systems."""
