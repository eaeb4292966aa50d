"""Characterization of geotagged social-media corpora.

Covers who posted (gender, location, registration history, biography
vocabulary), what each region talks about (volume dynamics and TF-IDF
characteristic terms) and how information flows between regions
(mention origin-destination matrix, hexagonal spatial density).
"""

__version__ = "0.1.0"
