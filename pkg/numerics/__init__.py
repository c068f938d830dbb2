"""
Numerical substrate: dense linear algebra, MLPs, Adam, gradient checks
"""
