# CLT验证套件
