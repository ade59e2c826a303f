# 验证套件目录，每个子目录是一个套件包
