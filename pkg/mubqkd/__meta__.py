name = 'mubqkd'
version = '1.0.0'
description = 'High error-rate quantum key distribution with two mutually unbiased bases'
url = 'https://github.com/justengel/mubqkd'
author = 'Justin Engel'
author_email = 'jtengel08@gmail.com'
